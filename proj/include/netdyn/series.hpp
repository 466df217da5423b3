#ifndef NETDYN_SERIES_HPP
#define NETDYN_SERIES_HPP

#include <optional>
#include <string>
#include <vector>

#include "netdyn/params.hpp"

namespace netdyn {

enum class Aggregation { Last, Mean, Mode, Count };
enum class GapPolicy { HoldLast, Zero };

const char* to_string(Aggregation a);
const char* to_string(GapPolicy g);
std::optional<Aggregation> aggregation_from_string(const std::string& s);
std::optional<GapPolicy> gap_policy_from_string(const std::string& s);

/// Uniformly sampled signal s(n): index n corresponds to wall time
/// start_time + n*tau.
struct TimeSeries {
    double start_time = 0.0;
    double tau = 1.0; ///< sampling interval, seconds
    std::vector<double> values;
    Aggregation aggregation = Aggregation::Last;
    GapPolicy gap_policy = GapPolicy::HoldLast;
    /// hold_last had nothing to hold for the leading bins; they were zero-filled.
    bool leading_gap = false;

    std::size_t size() const { return values.size(); }
    double time_at(std::size_t n) const { return start_time + double(n) * tau; }
};

/// Collapse irregular samples of one parameter into s(n) on a tau grid.
/// Bin n covers [start + n*tau, start + (n+1)*tau); start defaults to the
/// first sample's time and the grid always extends through the bin holding
/// the last sample. Samples are sorted by time first if needed (stable, so
/// equal-time order is preserved for the `last` mode).
///
/// Throws EmptyInputError on an empty sample list and Error on tau <= 0.
TimeSeries bin_series(std::vector<ParamSample> samples, double tau,
                      Aggregation aggregation = Aggregation::Last,
                      GapPolicy gap_policy = GapPolicy::HoldLast,
                      std::optional<double> start_time = std::nullopt,
                      std::optional<double> end_time = std::nullopt);

/// Valid-region moving mean of width w: output k is the mean of input values
/// k..k+w-1 (length N-w+1). tau is unchanged; start_time shifts by
/// (w-1)*tau/2 so outputs stay centre-aligned across different widths.
///
/// Throws WindowTooLargeError when w > N and Error when w < 1.
TimeSeries boxcar_average(const TimeSeries& series, std::size_t w);

/// Keep every factor-th sample starting from index 0; tau scales by factor.
/// Throws Error on factor < 1 or an empty series.
TimeSeries decimate(const TimeSeries& series, std::size_t factor);

/// CSV with columns index,time,value and a header row.
std::string series_to_csv(const TimeSeries& series);

/// Parse a series CSV; tau is recovered from the time column (the grid must
/// be uniform to within 1e-9 relative tolerance).
TimeSeries series_from_csv(const std::string& text);

} // namespace netdyn

#endif // NETDYN_SERIES_HPP
