#ifndef NETDYN_MONITOR_HPP
#define NETDYN_MONITOR_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "netdyn/capture.hpp"
#include "netdyn/dynamics.hpp"
#include "netdyn/rules.hpp"
#include "netdyn/series.hpp"

namespace netdyn {

struct FnnSettings {
    int max_dim = 8;
    int delay = 0; ///< 0 = pick via the autocorrelation first minimum
    double r_tol = kDefaultRtol;
    double a_tol = kDefaultAtol;
    double threshold = kDefaultFnnThreshold;
};

/// One averaging scale of the monitor. Each window bins the tracked
/// parameters at its own tau; a window may instead consume the averaged
/// series of an earlier (shorter) window via `feed_from`, in which case its
/// series is boxcar_average(source, r) decimated by r with
/// r = scale / source.scale (an exact integer).
struct WindowSpec {
    std::string name;
    double scale = 5.0;
    std::vector<int> param_ids;
    Aggregation aggregation = Aggregation::Last;
    GapPolicy gap_policy = GapPolicy::HoldLast;
    int boxcar = 1;        ///< additional smoothing of this window's series
    std::string feed_from; ///< empty = bin raw samples
    std::optional<FnnSettings> fnn;
    std::string baseline_path; ///< occupancy model file for novelty scoring
};

struct MonitorConfig {
    std::vector<WindowSpec> windows;
};

/// Throws ConfigError unless: at least one window; names unique and
/// filesystem-safe; scales positive, distinct, strictly increasing; params
/// valid catalog ids; feed_from names an earlier window at an integer scale
/// ratio; boxcar >= 1.
void validate_config(const MonitorConfig& config);

/// Section/key-value config text:
///   [window short]
///   scale = 5
///   params = 18, 1
///   aggregation = last
///   gap = hold_last
///   boxcar = 1
///   fnn = on
///   fnn_max_dim = 8
///   fnn_delay = 0
///   fnn_rtol = 15
///   fnn_atol = 2
///   fnn_threshold = 0.05
///   baseline = model.txt
///   feed_from = other_window
/// '#' starts a comment. Throws ConfigError with the offending line number.
MonitorConfig parse_monitor_config(const std::string& text);

struct SeriesReport {
    int param_id = 0;
    TimeSeries series;
    std::optional<int> fnn_delay;
    std::optional<FnnCurve> fnn;
    std::optional<int> dimension; ///< estimate when the curve crosses threshold
    std::vector<double> novelty;  ///< per embedded point, when a baseline is set
    std::vector<std::string> errors; ///< non-fatal analysis failures
};

struct WindowReport {
    std::string name;
    double scale = 0.0;
    std::vector<SeriesReport> params;
    std::vector<std::string> errors;
};

struct MonitorCounters {
    std::uint64_t packets_in = 0;
    std::uint64_t bytes_in = 0; ///< original (wire) lengths
    std::uint64_t decoded_ip = 0;
    std::uint64_t non_ip = 0;
    std::uint64_t decode_errors = 0;
};

struct MonitorReport {
    MonitorCounters counters;
    std::vector<Alert> alerts; ///< ordered by (time, rule name)
    std::vector<WindowReport> windows;
};

/// Decode every packet once, feed the rule engine and every window, and
/// assemble the merged report. Per-window analysis failures are recorded in
/// the report; capture-level failures propagate.
MonitorReport run_monitor(const PcapContents& capture,
                          const std::vector<SignatureRule>& rules,
                          const MonitorConfig& config);

/// Deliver records in file order, sleeping to scale inter-arrival gaps by
/// 1/speed. speed <= 0 is invalid unless `unlimited`, which never sleeps.
void replay(const PcapContents& capture, double speed, bool unlimited,
            const std::function<void(const CaptureRecord&, std::size_t)>& sink);

/// Deterministic plain-text rendering of the full report.
std::string monitor_report_text(const MonitorReport& report);

/// Write report.txt, alerts.tsv, and per-window/param series, FNN-curve and
/// novelty CSVs under `dir` (created if missing).
void write_monitor_report(const MonitorReport& report, const std::string& dir);

} // namespace netdyn

#endif // NETDYN_MONITOR_HPP
