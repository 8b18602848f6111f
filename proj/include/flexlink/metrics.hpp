#pragma once

#include <vector>

namespace flexlink {

struct SettlingResult {
    bool settled = false;
    double time = 0.0;
};

/// Earliest time after which the signal stays inside the
/// +-band_fraction*|target| band forever (last band exit). A target of zero
/// makes the band absolute.
SettlingResult settling_time(const std::vector<double>& t, const std::vector<double>& y,
                             double target, double band_fraction);

struct IntegralIndices {
    double ise = 0.0;
    double iae = 0.0;
    double itse = 0.0;
    double itae = 0.0;
};

/// Trapezoidal integrals of e^2, |e|, t e^2, t |e| over the full horizon.
IntegralIndices integral_indices(const std::vector<double>& t, const std::vector<double>& e);

struct OvershootResult {
    double percent = 0.0;  ///< absolute units instead when `absolute` is set
    bool absolute = false; ///< target was zero
};

/// 100 * max(0, max(y) - target) / |target| for regulation from below.
OvershootResult overshoot(const std::vector<double>& y, double target);

/// RMS of the error over the trailing `window` seconds.
double steady_state_norm(const std::vector<double>& t, const std::vector<double>& e,
                         double window);

/// Per-output regulation quality measures.
struct SignalMetrics {
    SettlingResult settling;
    OvershootResult overshoot;
    double steady_state_rms = 0.0;
    IntegralIndices indices;
};

struct MetricsConfig {
    double band_fraction = 0.02;  ///< settling band as a fraction of the step
    double ss_window = 1.0;       ///< trailing steady-state window [s]
};

}  // namespace flexlink
