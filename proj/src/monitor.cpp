#include "netdyn/monitor.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "netdyn/errors.hpp"
#include "netdyn/params.hpp"
#include "netdyn/textio.hpp"

namespace netdyn {

namespace {

bool safe_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
            return false;
    }
    return true;
}

// feed_from ratios must be exact integers; scales are user-typed doubles,
// so allow a hair of representation slack.
std::optional<std::size_t> integer_ratio(double coarse, double fine) {
    double r = coarse / fine;
    double rounded = std::round(r);
    if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded)
        return std::nullopt;
    return static_cast<std::size_t>(rounded);
}

} // namespace

void validate_config(const MonitorConfig& config) {
    if (config.windows.empty())
        throw ConfigError("monitor config: at least one window is required");
    std::set<std::string> names;
    double prev_scale = 0.0;
    for (std::size_t i = 0; i < config.windows.size(); ++i) {
        const WindowSpec& w = config.windows[i];
        const std::string where = "window '" + w.name + "': ";
        if (!safe_name(w.name))
            throw ConfigError("monitor config: window names must be non-empty "
                              "and use only letters, digits, '_', '-'");
        if (!names.insert(w.name).second)
            throw ConfigError(where + "duplicate name");
        if (!(w.scale > 0))
            throw ConfigError(where + "scale must be positive");
        if (w.scale <= prev_scale)
            throw ConfigError(where + "scales must be strictly increasing");
        prev_scale = w.scale;
        if (w.param_ids.empty())
            throw ConfigError(where + "at least one parameter id is required");
        for (int id : w.param_ids)
            if (id < 1 || id > param::count)
                throw ConfigError(where + "parameter id " + std::to_string(id) +
                                  " is outside 1.." + std::to_string(param::count));
        if (w.boxcar < 1)
            throw ConfigError(where + "boxcar width must be >= 1");
        if (!w.feed_from.empty()) {
            const WindowSpec* src = nullptr;
            for (std::size_t j = 0; j < i; ++j)
                if (config.windows[j].name == w.feed_from) src = &config.windows[j];
            if (!src)
                throw ConfigError(where + "feed_from must name an earlier window");
            if (!integer_ratio(w.scale, src->scale))
                throw ConfigError(where + "scale must be an integer multiple of '" +
                                  src->name + "' to feed from it");
        }
        if (w.fnn) {
            if (w.fnn->max_dim < 1)
                throw ConfigError(where + "fnn_max_dim must be >= 1");
            if (w.fnn->delay < 0)
                throw ConfigError(where + "fnn_delay must be >= 0");
            if (!(w.fnn->r_tol > 0) || !(w.fnn->a_tol > 0))
                throw ConfigError(where + "fnn tolerances must be positive");
        }
    }
}

MonitorConfig parse_monitor_config(const std::string& text) {
    MonitorConfig config;
    WindowSpec* current = nullptr;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;

    auto fail = [&](const std::string& msg) {
        throw ConfigError("monitor config line " + std::to_string(line_no) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        std::string body = line.substr(b, e - b + 1);

        if (body.front() == '[') {
            if (body.back() != ']') fail("unterminated section header");
            std::string section = body.substr(1, body.size() - 2);
            const std::string prefix = "window ";
            if (section.rfind(prefix, 0) != 0)
                fail("unknown section '" + section + "' (expected [window NAME])");
            WindowSpec spec;
            spec.name = section.substr(prefix.size());
            config.windows.push_back(std::move(spec));
            current = &config.windows.back();
            continue;
        }

        auto eq = body.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        if (!current) fail("key outside any [window ...] section");
        auto trim = [](std::string s) {
            std::size_t lo = s.find_first_not_of(" \t");
            if (lo == std::string::npos) return std::string();
            std::size_t hi = s.find_last_not_of(" \t");
            return s.substr(lo, hi - lo + 1);
        };
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (value.empty()) fail("empty value for '" + key + "'");

        auto need_int = [&](const std::string& v) {
            auto n = parse_int(v);
            if (!n) fail("'" + key + "' expects an integer, got '" + v + "'");
            return *n;
        };
        auto need_double = [&](const std::string& v) {
            auto n = parse_double(v);
            if (!n) fail("'" + key + "' expects a number, got '" + v + "'");
            return *n;
        };
        auto fnn_settings = [&]() -> FnnSettings& {
            if (!current->fnn) current->fnn.emplace();
            return *current->fnn;
        };

        if (key == "scale") {
            current->scale = need_double(value);
        } else if (key == "params") {
            current->param_ids.clear();
            for (const auto& piece : split_csv(value))
                current->param_ids.push_back(
                    static_cast<int>(need_int(trim(std::string(piece)))));
        } else if (key == "aggregation") {
            auto a = aggregation_from_string(value);
            if (!a) fail("unknown aggregation '" + value + "'");
            current->aggregation = *a;
        } else if (key == "gap") {
            auto g = gap_policy_from_string(value);
            if (!g) fail("unknown gap policy '" + value + "'");
            current->gap_policy = *g;
        } else if (key == "boxcar") {
            current->boxcar = static_cast<int>(need_int(value));
        } else if (key == "feed_from") {
            current->feed_from = value;
        } else if (key == "baseline") {
            current->baseline_path = value;
        } else if (key == "fnn") {
            if (value == "on") {
                fnn_settings();
            } else if (value == "off") {
                current->fnn.reset();
            } else {
                fail("'fnn' expects on or off");
            }
        } else if (key == "fnn_max_dim") {
            fnn_settings().max_dim = static_cast<int>(need_int(value));
        } else if (key == "fnn_delay") {
            fnn_settings().delay = static_cast<int>(need_int(value));
        } else if (key == "fnn_rtol") {
            fnn_settings().r_tol = need_double(value);
        } else if (key == "fnn_atol") {
            fnn_settings().a_tol = need_double(value);
        } else if (key == "fnn_threshold") {
            fnn_settings().threshold = need_double(value);
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    validate_config(config);
    return config;
}

namespace {

void analyze_series(SeriesReport& report, const WindowSpec& spec) {
    if (spec.fnn) {
        try {
            const FnnSettings& s = *spec.fnn;
            int delay = s.delay > 0 ? s.delay : autocorr_first_min_delay(report.series);
            report.fnn_delay = delay;
            report.fnn = fnn_curve(report.series, s.max_dim, delay, s.r_tol, s.a_tol);
            report.dimension = estimate_dimension(*report.fnn, s.threshold);
        } catch (const Error& e) {
            report.errors.push_back(std::string("fnn: ") + e.what());
        }
    }
    if (!spec.baseline_path.empty()) {
        try {
            BaselineFile base = baseline_from_text(read_text_file(spec.baseline_path));
            if (base.embed_dim < 2)
                throw Error("baseline file lacks embedding settings");
            DelayVectors vectors = embed(report.series, base.embed_dim, base.embed_delay);
            report.novelty.reserve(vectors.count());
            std::vector<double> point(base.model.grid_dim());
            for (std::size_t n = 0; n < vectors.count(); ++n) {
                for (std::size_t a = 0; a < base.model.axes.size(); ++a)
                    point[a] = vectors.at(n, base.model.axes[a]);
                report.novelty.push_back(novelty_score(base.model, point));
            }
        } catch (const Error& e) {
            report.errors.push_back(std::string("baseline: ") + e.what());
        }
    }
}

} // namespace

MonitorReport run_monitor(const PcapContents& capture,
                          const std::vector<SignatureRule>& rules,
                          const MonitorConfig& config) {
    validate_config(config);

    MonitorReport report;
    RuleEngine engine(rules);
    std::map<int, std::vector<ParamSample>> samples;

    for (std::size_t i = 0; i < capture.records.size(); ++i) {
        const CaptureRecord& record = capture.records[i];
        ++report.counters.packets_in;
        report.counters.bytes_in += record.original_length;

        DecodedPacket packet;
        try {
            packet = decode_packet(record, capture.link_type);
        } catch (const DecodeError&) {
            ++report.counters.decode_errors;
            continue;
        } catch (const MalformedHeaderError&) {
            ++report.counters.decode_errors;
            continue;
        }
        if (packet.ip)
            ++report.counters.decoded_ip;
        else
            ++report.counters.non_ip;

        auto fired = engine.on_packet(packet);
        report.alerts.insert(report.alerts.end(), fired.begin(), fired.end());
        for (const ParamSample& s : extract_params(packet))
            samples[s.param].push_back(s);
    }

    std::stable_sort(report.alerts.begin(), report.alerts.end(),
                     [](const Alert& a, const Alert& b) {
                         if (a.time != b.time) return a.time < b.time;
                         return a.rule < b.rule;
                     });

    std::optional<double> t0, t1;
    if (!capture.records.empty()) {
        t0 = capture.records.front().time();
        t1 = capture.records.back().time();
    }

    // Windows are processed in config (ascending-scale) order so a feeding
    // window's series exists before its consumers run.
    report.windows.reserve(config.windows.size());
    std::map<std::string, const WindowReport*> done;
    for (const WindowSpec& spec : config.windows) {
        WindowReport window;
        window.name = spec.name;
        window.scale = spec.scale;
        for (int id : spec.param_ids) {
            SeriesReport sr;
            sr.param_id = id;
            try {
                if (!spec.feed_from.empty()) {
                    const WindowReport* src = done.at(spec.feed_from);
                    const SeriesReport* src_series = nullptr;
                    for (const auto& candidate : src->params)
                        if (candidate.param_id == id) src_series = &candidate;
                    if (!src_series || src_series->series.values.empty())
                        throw Error("source window '" + spec.feed_from +
                                    "' has no series for parameter " + std::to_string(id));
                    std::size_t r = *integer_ratio(spec.scale, src->scale);
                    sr.series = decimate(boxcar_average(src_series->series, r), r);
                } else {
                    auto it = samples.find(id);
                    if (it == samples.end())
                        throw EmptyInputError("no samples for parameter " +
                                              std::to_string(id) + " in this capture");
                    sr.series = bin_series(it->second, spec.scale, spec.aggregation,
                                           spec.gap_policy, t0, t1);
                }
                if (spec.boxcar > 1)
                    sr.series = boxcar_average(sr.series,
                                               static_cast<std::size_t>(spec.boxcar));
                analyze_series(sr, spec);
            } catch (const Error& e) {
                sr.errors.push_back(e.what());
            }
            window.params.push_back(std::move(sr));
        }
        report.windows.push_back(std::move(window));
        done[spec.name] = &report.windows.back();
    }
    return report;
}

void replay(const PcapContents& capture, double speed, bool unlimited,
            const std::function<void(const CaptureRecord&, std::size_t)>& sink) {
    if (!unlimited && !(speed > 0))
        throw std::invalid_argument("replay: speed factor must be positive");
    double prev = 0.0;
    for (std::size_t i = 0; i < capture.records.size(); ++i) {
        const CaptureRecord& record = capture.records[i];
        if (!unlimited && i > 0) {
            double gap = (record.time() - prev) / speed;
            if (gap > 0)
                std::this_thread::sleep_for(std::chrono::duration<double>(gap));
        }
        prev = record.time();
        sink(record, i);
    }
}

namespace {

void append_series_summary(std::string& out, const SeriesReport& sr) {
    const auto& v = sr.series.values;
    out += "  param " + std::to_string(sr.param_id) + " samples " +
           std::to_string(v.size());
    if (!v.empty()) {
        double lo = v[0], hi = v[0], sum = 0.0;
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            sum += x;
        }
        out += " min " + format_number(lo) + " max " + format_number(hi) +
               " mean " + format_number(sum / double(v.size()));
    }
    out += "\n";
    if (sr.fnn) {
        out += "  param " + std::to_string(sr.param_id) + " fnn delay " +
               std::to_string(*sr.fnn_delay) + " dimension " +
               (sr.dimension ? std::to_string(*sr.dimension) : std::string("none"));
        for (const FnnPoint& p : sr.fnn->points)
            out += " d" + std::to_string(p.dim) + "=" + format_number(p.fraction);
        out += "\n";
    }
    if (!sr.novelty.empty()) {
        double peak = 0.0, sum = 0.0;
        std::size_t flagged = 0;
        for (double s : sr.novelty) {
            peak = std::max(peak, s);
            sum += s;
            if (s > 0) ++flagged;
        }
        out += "  param " + std::to_string(sr.param_id) + " novelty points " +
               std::to_string(sr.novelty.size()) + " flagged " +
               std::to_string(flagged) + " peak " + format_number(peak) +
               " mean " + format_number(sum / double(sr.novelty.size())) + "\n";
    }
    for (const auto& err : sr.errors)
        out += "  param " + std::to_string(sr.param_id) + " error " + err + "\n";
}

std::string series_file_name(const WindowReport& w, const SeriesReport& sr,
                             const char* kind) {
    return w.name + "_p" + std::to_string(sr.param_id) + "_" + kind + ".csv";
}

} // namespace

std::string monitor_report_text(const MonitorReport& report) {
    std::string out;
    out += "packets_in " + std::to_string(report.counters.packets_in) + "\n";
    out += "bytes_in " + std::to_string(report.counters.bytes_in) + "\n";
    out += "decoded_ip " + std::to_string(report.counters.decoded_ip) + "\n";
    out += "non_ip " + std::to_string(report.counters.non_ip) + "\n";
    out += "decode_errors " + std::to_string(report.counters.decode_errors) + "\n";
    out += "alerts " + std::to_string(report.alerts.size()) + "\n";
    for (const Alert& a : report.alerts)
        out += alert_line(a) + "\n";
    for (const WindowReport& w : report.windows) {
        out += "window " + w.name + " scale " + format_number(w.scale) + "\n";
        for (const auto& err : w.errors)
            out += "  error " + err + "\n";
        for (const SeriesReport& sr : w.params)
            append_series_summary(out, sr);
    }
    return out;
}

void write_monitor_report(const MonitorReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path root(dir);
    write_text_file((root / "report.txt").string(), monitor_report_text(report));

    std::string alerts;
    for (const Alert& a : report.alerts)
        alerts += alert_line(a) + "\n";
    write_text_file((root / "alerts.tsv").string(), alerts);

    for (const WindowReport& w : report.windows) {
        for (const SeriesReport& sr : w.params) {
            if (!sr.series.values.empty())
                write_text_file((root / series_file_name(w, sr, "series")).string(),
                                series_to_csv(sr.series));
            if (sr.fnn)
                write_text_file((root / series_file_name(w, sr, "fnn")).string(),
                                fnn_curve_to_csv(*sr.fnn));
            if (!sr.novelty.empty()) {
                std::string csv = "index,score\n";
                for (std::size_t n = 0; n < sr.novelty.size(); ++n)
                    csv += std::to_string(n) + "," + format_number(sr.novelty[n]) + "\n";
                write_text_file((root / series_file_name(w, sr, "novelty")).string(), csv);
            }
        }
    }
}

} // namespace netdyn
