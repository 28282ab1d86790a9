#pragma once

#include "wavescat/scene.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace wavescat {

// Frequency-domain solutions phi_m(x, omega) for a batch of incident orders.
class FrequencySolver {
public:
    virtual ~FrequencySolver() = default;
    // Rows follow `points`, columns follow `orders`.
    virtual Eigen::MatrixXcd fields(cplx omega, const std::vector<Point2>& points,
                                    const std::vector<int>& orders) const = 0;
    // Stable text identifying everything the values depend on.
    virtual std::string fingerprint() const = 0;
};

} // namespace wavescat
