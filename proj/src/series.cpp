#include "netdyn/series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "netdyn/errors.hpp"
#include "netdyn/textio.hpp"

namespace netdyn {

const char* to_string(Aggregation a)
{
    switch (a) {
    case Aggregation::Last: return "last";
    case Aggregation::Mean: return "mean";
    case Aggregation::Mode: return "mode";
    case Aggregation::Count: return "count";
    }
    return "?";
}

const char* to_string(GapPolicy g)
{
    return g == GapPolicy::HoldLast ? "hold_last" : "zero";
}

std::optional<Aggregation> aggregation_from_string(const std::string& s)
{
    if (s == "last") return Aggregation::Last;
    if (s == "mean") return Aggregation::Mean;
    if (s == "mode") return Aggregation::Mode;
    if (s == "count") return Aggregation::Count;
    return std::nullopt;
}

std::optional<GapPolicy> gap_policy_from_string(const std::string& s)
{
    if (s == "hold_last") return GapPolicy::HoldLast;
    if (s == "zero") return GapPolicy::Zero;
    return std::nullopt;
}

TimeSeries bin_series(std::vector<ParamSample> samples, double tau,
                      Aggregation aggregation, GapPolicy gap_policy,
                      std::optional<double> start_time,
                      std::optional<double> end_time)
{
    if (samples.empty())
        throw EmptyInputError("bin_series: no samples");
    if (!(tau > 0))
        throw Error("bin_series: tau must be positive");

    if (!std::is_sorted(samples.begin(), samples.end(),
                        [](const ParamSample& a, const ParamSample& b) {
                            return a.time < b.time;
                        })) {
        std::stable_sort(samples.begin(), samples.end(),
                         [](const ParamSample& a, const ParamSample& b) {
                             return a.time < b.time;
                         });
    }

    const double start = start_time.value_or(samples.front().time);
    const double last = std::max(end_time.value_or(samples.back().time),
                                 samples.back().time);
    if (samples.front().time < start)
        throw Error("bin_series: sample precedes the requested start time");

    const auto bin_of = [&](double t) {
        return static_cast<std::size_t>(std::floor((t - start) / tau));
    };
    const std::size_t n_bins = bin_of(last) + 1;

    TimeSeries out;
    out.start_time = start;
    out.tau = tau;
    out.aggregation = aggregation;
    out.gap_policy = gap_policy;
    out.values.assign(n_bins, 0.0);

    std::vector<bool> occupied(n_bins, false);
    std::size_t i = 0;
    for (std::size_t bin = 0; bin < n_bins; ++bin) {
        const std::size_t first = i;
        while (i < samples.size() && bin_of(samples[i].time) == bin)
            ++i;
        const std::size_t count = i - first;
        if (count == 0)
            continue;
        occupied[bin] = true;
        switch (aggregation) {
        case Aggregation::Last:
            out.values[bin] = samples[i - 1].value;
            break;
        case Aggregation::Mean: {
            double sum = 0.0;
            for (std::size_t k = first; k < i; ++k)
                sum += samples[k].value;
            out.values[bin] = sum / double(count);
            break;
        }
        case Aggregation::Mode: {
            // most frequent value; ties resolved towards the smallest value
            std::map<double, std::size_t> freq;
            for (std::size_t k = first; k < i; ++k)
                ++freq[samples[k].value];
            double best = samples[first].value;
            std::size_t best_n = 0;
            for (const auto& [value, n] : freq) {
                if (n > best_n) {
                    best = value;
                    best_n = n;
                }
            }
            out.values[bin] = best;
            break;
        }
        case Aggregation::Count:
            out.values[bin] = double(count);
            break;
        }
    }

    bool seen = false;
    double held = 0.0;
    for (std::size_t bin = 0; bin < n_bins; ++bin) {
        if (occupied[bin]) {
            seen = true;
            held = out.values[bin];
            continue;
        }
        if (gap_policy == GapPolicy::HoldLast) {
            if (!seen)
                out.leading_gap = true; // nothing to hold yet: zero-fill, flagged
            out.values[bin] = seen ? held : 0.0;
        } else {
            out.values[bin] = 0.0;
        }
    }
    return out;
}

TimeSeries boxcar_average(const TimeSeries& series, std::size_t w)
{
    if (w < 1)
        throw Error("boxcar_average: w must be >= 1");
    const std::size_t n = series.values.size();
    if (w > n)
        throw WindowTooLargeError("boxcar_average: window " + std::to_string(w) +
                                  " exceeds series length " + std::to_string(n));

    TimeSeries out = series;
    out.start_time = series.start_time + double(w - 1) * series.tau / 2.0;
    out.values.resize(n - w + 1);
    for (std::size_t k = 0; k + w <= n; ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j < w; ++j)
            sum += series.values[k + j];
        out.values[k] = sum / double(w);
    }
    return out;
}

TimeSeries decimate(const TimeSeries& series, std::size_t factor)
{
    if (factor < 1)
        throw Error("decimate: factor must be >= 1");
    if (series.values.empty())
        throw EmptyInputError("decimate: empty series");
    TimeSeries out = series;
    out.tau = series.tau * double(factor);
    out.values.clear();
    for (std::size_t n = 0; n < series.values.size(); n += factor)
        out.values.push_back(series.values[n]);
    return out;
}

std::string series_to_csv(const TimeSeries& series)
{
    std::string out = "index,time,value\n";
    for (std::size_t n = 0; n < series.values.size(); ++n) {
        out += std::to_string(n);
        out += ',';
        out += format_number(series.time_at(n));
        out += ',';
        out += format_number(series.values[n]);
        out += '\n';
    }
    return out;
}

TimeSeries series_from_csv(const std::string& text)
{
    TimeSeries out;
    std::vector<double> times;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (lineno == 1 && line.rfind("index,", 0) == 0)
            continue;
        auto fields = split_csv(line);
        if (fields.size() != 3)
            throw IoError("series CSV line " + std::to_string(lineno) +
                          ": expected index,time,value");
        auto t = parse_double(fields[1]);
        auto v = parse_double(fields[2]);
        if (!t || !v)
            throw IoError("series CSV line " + std::to_string(lineno) +
                          ": malformed number");
        times.push_back(*t);
        out.values.push_back(*v);
    }
    if (out.values.empty())
        throw EmptyInputError("series CSV: no data rows");
    out.start_time = times.front();
    out.tau = times.size() > 1 ? times[1] - times[0] : 1.0;
    if (!(out.tau > 0))
        throw IoError("series CSV: non-increasing time column");
    for (std::size_t n = 1; n < times.size(); ++n) {
        double expect = out.start_time + double(n) * out.tau;
        double tol = 1e-9 * std::max(1.0, std::abs(expect));
        if (std::abs(times[n] - expect) > tol)
            throw IoError("series CSV: time column is not a uniform grid near row " +
                          std::to_string(n));
    }
    return out;
}

} // namespace netdyn
