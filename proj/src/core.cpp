#include "nsavg/core.hpp"

namespace nsavg {

Box::Box(Vector lower, Vector upper) : lo(std::move(lower)), hi(std::move(upper)) {
    if (lo.size() != hi.size()) {
        throw DimensionMismatch("box bounds have different lengths");
    }
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (!(lo[i] < hi[i])) {
            throw ConfigError("box axis " + std::to_string(i + 1) + " is empty");
        }
    }
}

Box Box::interval(double a, double b) {
    Vector lo(1), hi(1);
    lo << a;
    hi << b;
    return Box(lo, hi);
}

bool Box::contains(const Vector& x) const {
    return x.size() == lo.size() && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

Vector Box::clip(const Vector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

}  // namespace nsavg
