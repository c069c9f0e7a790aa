#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "kdenoise/noise.hpp"

namespace kdn {

// One experiment measurement. Serialized as CSV for figure reproduction.
struct MetricRow {
    std::string experiment;
    long n_pixels = 0;     // N, total pixels
    long subgrid_size = 0; // M, subgrid points per patch
    double theta = 0.0;
    int eta3 = 0;
    double sigma = 0.0;
    double alpha = 0.0;
    double l2_error = 0.0;
    double sup_error = 0.0;
    double seconds = 0.0;
};

inline constexpr const char* kMetricCsvHeader =
    "experiment,N,M,theta,eta3,sigma,alpha,l2_error,sup_error,seconds";

namespace detail {
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}
} // namespace detail

inline std::string format_metric_row(const MetricRow& r) {
    std::string s = r.experiment;
    s += "," + std::to_string(r.n_pixels);
    s += "," + std::to_string(r.subgrid_size);
    s += "," + detail::fmt_double(r.theta);
    s += "," + std::to_string(r.eta3);
    s += "," + detail::fmt_double(r.sigma);
    s += "," + detail::fmt_double(r.alpha);
    s += "," + detail::fmt_double(r.l2_error);
    s += "," + detail::fmt_double(r.sup_error);
    s += "," + detail::fmt_double(r.seconds);
    return s;
}

inline void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
    out << "# rng=" << kRngName << "\n" << kMetricCsvHeader << "\n";
    for (const MetricRow& r : rows)
        out << format_metric_row(r) << "\n";
}

} // namespace kdn
