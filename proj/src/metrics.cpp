#include "flexlink/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace flexlink {

SettlingResult settling_time(const std::vector<double>& t, const std::vector<double>& y,
                             double target, double band_fraction) {
    if (t.size() != y.size() || t.empty())
        throw std::invalid_argument("settling_time: grids must be non-empty and equal length");
    const double band = (target == 0.0) ? band_fraction
                                        : band_fraction * std::abs(target);
    int last_outside = -1;
    for (int i = static_cast<int>(t.size()) - 1; i >= 0; --i) {
        if (std::abs(y[i] - target) > band) {
            last_outside = i;
            break;
        }
    }
    if (last_outside < 0) return {true, 0.0};
    if (last_outside == static_cast<int>(t.size()) - 1) return {false, t.back()};
    return {true, t[last_outside + 1]};
}

IntegralIndices integral_indices(const std::vector<double>& t, const std::vector<double>& e) {
    if (t.size() != e.size() || t.size() < 2)
        throw std::invalid_argument("integral_indices: need at least two samples");
    IntegralIndices idx;
    for (size_t i = 0; i + 1 < t.size(); ++i) {
        const double dt = t[i + 1] - t[i];
        const double sq0 = e[i] * e[i], sq1 = e[i + 1] * e[i + 1];
        const double ab0 = std::abs(e[i]), ab1 = std::abs(e[i + 1]);
        idx.ise += 0.5 * dt * (sq0 + sq1);
        idx.iae += 0.5 * dt * (ab0 + ab1);
        idx.itse += 0.5 * dt * (t[i] * sq0 + t[i + 1] * sq1);
        idx.itae += 0.5 * dt * (t[i] * ab0 + t[i + 1] * ab1);
    }
    return idx;
}

OvershootResult overshoot(const std::vector<double>& y, double target) {
    if (y.empty()) throw std::invalid_argument("overshoot: empty signal");
    double peak = y.front();
    for (double v : y) peak = std::max(peak, v);
    OvershootResult res;
    if (target == 0.0) {
        res.absolute = true;
        res.percent = std::max(0.0, peak);
    } else {
        res.percent = 100.0 * std::max(0.0, peak - target) / std::abs(target);
    }
    return res;
}

double steady_state_norm(const std::vector<double>& t, const std::vector<double>& e,
                         double window) {
    if (t.size() != e.size() || t.empty())
        throw std::invalid_argument("steady_state_norm: grids must match and be non-empty");
    const double t_start = t.back() - window;
    double sum = 0.0;
    size_t count = 0;
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= t_start) {
            sum += e[i] * e[i];
            ++count;
        }
    }
    if (count == 0) return 0.0;
    return std::sqrt(sum / count);
}

}  // namespace flexlink
