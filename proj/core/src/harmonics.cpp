#include "pllt/harmonics.hpp"

namespace pllt {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

void basis_eval(double phi, int n_harmonics, Eigen::VectorXd& q) {
    q.resize(2 * n_harmonics + 1);
    q[0] = kInvSqrt2;
    const double s1 = std::sin(phi);
    const double c1 = std::cos(phi);
    double s = s1, c = c1;
    q[1] = s1;
    q[2] = c1;
    for (int j = 2; j <= n_harmonics; ++j) {
        // angle-addition recurrence for sin(j phi), cos(j phi)
        const double s_next = s * c1 + c * s1;
        const double c_next = c * c1 - s * s1;
        s = s_next;
        c = c_next;
        q[2 * j - 1] = s;
        q[2 * j] = c;
    }
}

Eigen::VectorXd basis_eval(double phi, int n_harmonics) {
    Eigen::VectorXd q;
    basis_eval(phi, n_harmonics, q);
    return q;
}

double phase_lag(const AdaptiveFilter& response, const AdaptiveFilter& force, int kappa) {
    const int upsilon = force.config().upsilon;
    return wrap_to_pi(response.phase(kappa) - force.phase(upsilon));
}

}  // namespace pllt
