// Acceptance gate for the toolkit: every shipping criterion is checked end
// to end and prints exactly one PASS/FAIL line with the measured numbers.
// The process exits with the count of failing criteria, so a zero status
// means the whole gate is green.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "netdyn/capture.hpp"
#include "netdyn/dynamics.hpp"
#include "netdyn/errors.hpp"
#include "netdyn/monitor.hpp"
#include "netdyn/rules.hpp"
#include "netdyn/series.hpp"
#include "netdyn/synth.hpp"
#include "netdyn/textio.hpp"
#include "support/netgen.hpp"
#include "support/oracles.hpp"

using namespace netdyn;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point begin) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin)
        .count();
}

PcapContents capture_of(const std::vector<netgen::Packet>& packets) {
    std::istringstream in(netgen::pcap_bytes(packets));
    return read_capture(in);
}

std::vector<DecodedPacket> decode_all(const PcapContents& capture) {
    std::vector<DecodedPacket> out;
    out.reserve(capture.records.size());
    for (const CaptureRecord& record : capture.records)
        out.push_back(decode_packet(record, capture.link_type));
    return out;
}

std::vector<Alert> scan_alerts(const std::vector<netgen::Packet>& packets,
                               std::vector<SignatureRule> rules) {
    PcapContents capture = capture_of(packets);
    RuleEngine engine(std::move(rules));
    std::vector<Alert> out;
    for (const CaptureRecord& record : capture.records) {
        auto fired = engine.on_packet(decode_packet(record, capture.link_type));
        out.insert(out.end(), fired.begin(), fired.end());
    }
    return out;
}

double variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= double(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / double(v.size());
}

// --- criterion 1: delay embedding equals the exhaustive oracle -------------

Outcome criterion_embedding() {
    const auto begin = std::chrono::steady_clock::now();
    int cases = 0, mismatches = 0;
    for (std::size_t n = 1; n <= 12; ++n) {
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i)
            values[i] = std::sin(1.7 * double(i)) + double(i % 3);
        TimeSeries series;
        series.values = values;
        for (int d = 1; d <= 4; ++d) {
            for (int T = 1; T <= 4; ++T) {
                ++cases;
                auto expect = oracles::embed_oracle(values, d, T);
                if (expect.empty()) {
                    try {
                        embed(series, d, T);
                        ++mismatches;
                    } catch (const InsufficientDataError&) {
                    }
                    continue;
                }
                DelayVectors got = embed(series, d, T);
                bool same = got.count() == expect.size() && got.dim == d;
                for (std::size_t r = 0; same && r < expect.size(); ++r)
                    for (int c = 0; c < d; ++c)
                        if (got.at(r, c) != expect[r][std::size_t(c)]) same = false;
                if (!same) ++mismatches;
            }
        }
    }
    const double elapsed = seconds_since(begin);
    Outcome out;
    out.pass = mismatches == 0 && elapsed < 1.0;
    out.detail = std::to_string(cases) + " series/dimension/delay combinations, " +
                 std::to_string(mismatches) + " mismatches, " + fmt(elapsed) + " s";
    return out;
}

// --- criterion 2: fnn recovers known dimensions -----------------------------

Outcome criterion_fnn_recovery() {
    Outcome out;
    out.pass = true;

    const auto begin = std::chrono::steady_clock::now();
    TimeSeries lorenz = synth_lorenz_x(10000);
    const int delay = autocorr_first_min_delay(lorenz);
    FnnCurve curve = fnn_curve(lorenz, 8, delay, kDefaultRtol, kDefaultAtol);
    auto estimate = estimate_dimension(curve, kDefaultFnnThreshold);
    const double lorenz_elapsed = seconds_since(begin);
    std::string lorenz_note =
        "lorenz estimate=" + (estimate ? std::to_string(*estimate) : std::string("none")) +
        " at delay " + std::to_string(delay) + " in " + fmt(lorenz_elapsed, 1) + " s (";
    for (const FnnPoint& p : curve.points) {
        if (p.dim > 4) break;
        lorenz_note += "d" + std::to_string(p.dim) + "=" + fmt(p.fraction) + " ";
    }
    lorenz_note.back() = ')';
    if (!(estimate && *estimate == 3 && lorenz_elapsed < 60.0)) {
        out.pass = false;
        lorenz_note += " -- expected 3: the d=3 fraction stays above the 0.05 cut";
    }

    TimeSeries wave = synth_sine(1000, 12.0 * 3.14159265358979324);
    auto sine_estimate =
        estimate_dimension(fnn_curve(wave, 5, autocorr_first_min_delay(wave)),
                           kDefaultFnnThreshold);
    const bool sine_ok = sine_estimate && *sine_estimate == 2;
    if (!sine_ok) out.pass = false;

    FnnCurve noise = fnn_curve(synth_uniform_noise(300, 99), 8, 1);
    double noise_min = 1.0;
    for (const FnnPoint& p : noise.points) noise_min = std::min(noise_min, p.fraction);
    const bool noise_ok =
        noise.points.size() == 8 && noise_min > 0.2 &&
        !estimate_dimension(noise, kDefaultFnnThreshold).has_value();
    if (!noise_ok) out.pass = false;

    out.detail = lorenz_note + "; sine estimate=" +
                 (sine_estimate ? std::to_string(*sine_estimate) : std::string("none")) +
                 "; noise estimate=none with min fraction " + fmt(noise_min) +
                 (noise_ok ? "" : " -- expected every fraction above 0.2");
    return out;
}

// --- criterion 3: full pipeline on a large synthetic capture ----------------

Outcome criterion_traffic_pipeline() {
    const auto begin = std::chrono::steady_clock::now();
    PcapContents capture = capture_of(netgen::benign_traffic(50400, 2026));
    const double span = capture.records.back().time() - capture.records.front().time();

    MonitorConfig config;
    WindowSpec w;
    w.name = "rate";
    w.scale = 5.0;
    w.param_ids = {18};
    w.aggregation = Aggregation::Count;
    w.fnn = FnnSettings{};
    config.windows.push_back(std::move(w));
    MonitorReport report = run_monitor(capture, builtin_catalog(), config);
    const double elapsed = seconds_since(begin);

    Outcome out;
    const SeriesReport& sr = report.windows.at(0).params.at(0);
    if (!sr.fnn) {
        out.detail = "fnn curve missing";
        for (const auto& e : sr.errors) out.detail += "; " + e;
        return out;
    }
    double max_rise = 0.0;
    for (std::size_t i = 1; i < sr.fnn->points.size(); ++i)
        if (sr.fnn->points[i].dim > 2)
            max_rise = std::max(max_rise, sr.fnn->points[i].fraction -
                                              sr.fnn->points[i - 1].fraction);
    out.pass = report.counters.packets_in >= 50000 && span >= 1800.0 &&
               report.alerts.empty() && max_rise <= 0.05 && elapsed < 300.0;
    out.detail = std::to_string(report.counters.packets_in) + " packets over " +
                 fmt(span / 60.0, 1) + " min, " +
                 std::to_string(sr.series.values.size()) +
                 " bins, max fnn rise beyond d=2 " + fmt(max_rise) + ", " +
                 fmt(elapsed, 1) + " s end to end";
    return out;
}

// --- criterion 4: one alert per crafted attack capture ----------------------

Outcome criterion_signatures() {
    const std::vector<netgen::Packet> benign = netgen::benign_traffic(1000, 424242);
    const double mid = benign[benign.size() / 2].time;

    Outcome out;
    out.pass = true;
    std::string bad;

    if (!scan_alerts(benign, builtin_catalog()).empty()) {
        out.pass = false;
        bad += " benign-capture-alerted";
    }
    for (const std::string& name : netgen::attack_names()) {
        auto packets = netgen::merge_by_time(benign, netgen::attack_flow(name, mid));
        auto alerts = scan_alerts(packets, builtin_catalog());
        if (alerts.size() != 1 || alerts[0].rule != name) {
            out.pass = false;
            bad += " " + name + "(" + std::to_string(alerts.size()) + ")";
        }
    }

    // Probe rule: a lone ACK with identical ports fires; the handshake ACKs
    // in the benign stream must not.
    if (!scan_alerts(benign, {ack_scan_rule()}).empty()) {
        out.pass = false;
        bad += " ack-scan-on-benign";
    }
    std::vector<netgen::Packet> lone;
    lone.push_back({mid + 0.0007,
                    netgen::make_tcp_frame({"10.9.3.3", "10.2.0.1"}, 1234, 1234,
                                           netgen::kAck, 0, 9, 9),
                    std::nullopt, std::nullopt});
    auto probe_alerts =
        scan_alerts(netgen::merge_by_time(benign, std::move(lone)), {ack_scan_rule()});
    if (probe_alerts.size() != 1 || probe_alerts[0].rule != "ack-scan") {
        out.pass = false;
        bad += " ack-scan-missed";
    }

    out.detail = std::to_string(netgen::attack_names().size()) +
                 " attack captures with one matching alert each, benign capture "
                 "silent, lone-ACK probe fires only on identical ports";
    if (!out.pass) out.detail += " -- failures:" + bad;
    return out;
}

// --- criterion 5: catalog parameter-usage frequencies ------------------------

Outcome criterion_histogram() {
    const std::map<int, int> expect = {{1, 3},  {2, 1},  {3, 1},  {4, 2},  {5, 2},
                                       {6, 1},  {7, 1},  {8, 1},  {9, 1},  {10, 1},
                                       {11, 2}, {12, 2}, {13, 1}, {14, 2}, {15, 1},
                                       {16, 2}, {17, 2}};
    const std::map<int, int> got = param_usage_histogram(builtin_catalog());
    Outcome out;
    out.pass = true;
    std::string diff;
    for (const auto& [id, count] : expect) {
        auto it = got.find(id);
        const int have = it == got.end() ? -1 : it->second;
        if (have != count) {
            out.pass = false;
            diff += " id" + std::to_string(id) + "=" + std::to_string(have) +
                    " (want " + std::to_string(count) + ")";
        }
    }
    out.detail = "17 header-parameter frequencies compared exactly";
    if (!out.pass) out.detail += " -- mismatches:" + diff;
    return out;
}

// --- criterion 6: boxcar variance reduction ---------------------------------

Outcome criterion_noise_reduction() {
    TimeSeries noise = synth_uniform_noise(100000, 7);
    const double var_in = variance(noise.values);
    Outcome out;
    out.pass = true;
    out.detail = "input variance " + fmt(var_in, 4);
    for (std::size_t w : {std::size_t(4), std::size_t(16), std::size_t(64)}) {
        const double var_out = variance(boxcar_average(noise, w).values);
        const double want = var_in / double(w);
        const double rel = std::abs(var_out - want) / want;
        out.detail += ", w=" + std::to_string(w) + " ratio " +
                      fmt(var_in / var_out, 1) + " (off by " + fmt(rel * 100.0, 1) +
                      "%)";
        if (rel > 0.2) out.pass = false;
    }
    return out;
}

// --- criterion 7: windowed rule vs. brute-force recount ----------------------

Outcome criterion_windowed_oracle() {
    std::mt19937 rng(0xACC7u);
    const char* dsts[4] = {"10.5.0.1", "10.5.0.2", "10.5.0.3", "10.5.0.4"};
    int streams = 0, failures = 0;

    for (int trial = 0; trial < 1000; ++trial) {
        std::uniform_int_distribution<int> window_pick(2, 20);
        std::uniform_int_distribution<int> threshold_pick(1, 12);
        std::uniform_int_distribution<int> count_pick(30, 120);
        std::uniform_real_distribution<double> step(0.01, 1.2);
        std::uniform_int_distribution<int> dst_pick(0, 3);
        std::uniform_int_distribution<int> syn_pick(0, 9);

        const int window = window_pick(rng);
        const int threshold = threshold_pick(rng);
        SignatureRule rule = parse_rules(
            "rule \"flood\" when count(tcp.syn, group by ip.dst, window " +
            std::to_string(window) + "s) > " + std::to_string(threshold) + "\n")[0];

        std::vector<netgen::Packet> packets;
        double t = 1000.0;
        const int n = count_pick(rng);
        for (int i = 0; i < n; ++i) {
            t += step(rng);
            const int dst = dst_pick(rng);
            const bool syn = syn_pick(rng) < 7;
            packets.push_back(
                {t,
                 netgen::make_tcp_frame({"10.4.0.9", dsts[dst]}, 49200 + i, 80,
                                        syn ? netgen::kSyn : netgen::kAck, 0,
                                        std::uint32_t(i), 0),
                 std::nullopt, std::nullopt});
        }
        std::vector<DecodedPacket> decoded = decode_all(capture_of(packets));

        std::vector<oracles::KeyedEvent> events;
        for (const DecodedPacket& p : decoded)
            events.push_back({p.time(), p.ip->dst_addr, p.tcp()->flags.syn});
        const std::vector<double> expect =
            oracles::windowed_oracle(events, double(window), threshold);

        std::vector<double> got;
        for (const Alert& a : eval_windowed(rule, decoded)) got.push_back(a.time);

        ++streams;
        if (got != expect) ++failures;
    }

    Outcome out;
    out.pass = failures == 0;
    out.detail = std::to_string(streams) + " random event streams, " +
                 std::to_string(failures) + " alert-time mismatches";
    return out;
}

// --- criterion 8: byte-identical monitor output ------------------------------

#ifdef NETDYN_CLI_PATH

int run_cli(const std::string& args, const std::filesystem::path& out_path) {
    const std::string cmd = std::string("'") + NETDYN_CLI_PATH + "' " + args +
                            " > '" + out_path.string() + "' 2>&1";
    const int raw = std::system(cmd.c_str());
    return raw == -1 ? -1 : (WIFEXITED(raw) ? WEXITSTATUS(raw) : -1);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Outcome criterion_determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "netdyn_acceptance";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    auto packets = netgen::merge_by_time(netgen::benign_traffic(8000, 55),
                                         netgen::attack_flow("syn-flood", 1023456989.0));
    const auto pcap = dir / "capture.pcap";
    netgen::write_pcap_file(pcap.string(), packets);
    const auto cfg = dir / "windows.cfg";
    write_text_file(cfg.string(),
                    "[window fine]\nscale = 5\nparams = 18\naggregation = count\n"
                    "fnn = on\n"
                    "[window coarse]\nscale = 60\nparams = 18\nfeed_from = fine\n");

    const std::string base_args =
        "monitor '" + pcap.string() + "' --builtin --config '" + cfg.string() + "'";
    Outcome out;
    const int rc1 = run_cli(base_args, dir / "run1.txt");
    const int rc2 = run_cli(base_args, dir / "run2.txt");
    const std::string text1 = slurp(dir / "run1.txt");
    const std::string text2 = slurp(dir / "run2.txt");

    const int rd1 = run_cli(base_args + " -o '" + (dir / "out1").string() + "'",
                            dir / "ignored1.txt");
    const int rd2 = run_cli(base_args + " -o '" + (dir / "out2").string() + "'",
                            dir / "ignored2.txt");
    std::size_t files = 0, file_diffs = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir / "out1")) {
        ++files;
        const auto twin = dir / "out2" / entry.path().filename();
        if (!std::filesystem::exists(twin) || slurp(entry.path()) != slurp(twin))
            ++file_diffs;
    }

    out.pass = rc1 == 1 && rc2 == 1 && rd1 == 1 && rd2 == 1 && !text1.empty() &&
               text1 == text2 && files >= 4 && file_diffs == 0;
    out.detail = "two runs over " + std::to_string(packets.size()) +
                 " packets: stdout " +
                 (text1 == text2 ? "identical" : "DIFFERS") + " (" +
                 std::to_string(text1.size()) + " bytes), " + std::to_string(files) +
                 " report files with " + std::to_string(file_diffs) + " diffs";
    return out;
}

#endif // NETDYN_CLI_PATH

} // namespace

int main() {
    struct Entry {
        int id;
        const char* title;
        Outcome (*fn)();
    };
    const Entry entries[] = {
        {1, "delay embedding equals the exhaustive oracle", criterion_embedding},
        {2, "fnn recovers known dimensions (lorenz 3, sine 2, noise none)",
         criterion_fnn_recovery},
        {3, "50k-packet synthetic capture settles the fnn curve end to end",
         criterion_traffic_pipeline},
        {4, "every builtin attack capture raises exactly its own alert",
         criterion_signatures},
        {5, "builtin catalog parameter-usage frequencies match exactly",
         criterion_histogram},
        {6, "boxcar averaging shrinks noise variance like 1/w",
         criterion_noise_reduction},
        {7, "windowed rules equal the brute-force recount oracle",
         criterion_windowed_oracle},
#ifdef NETDYN_CLI_PATH
        {8, "monitor output is byte-identical across runs", criterion_determinism},
#endif
    };

    int failures = 0;
    for (const Entry& entry : entries) {
        Outcome outcome;
        try {
            outcome = entry.fn();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("threw: ") + e.what();
        }
        if (!outcome.pass) ++failures;
        std::printf("criterion %d [%s] %s: %s\n", entry.id,
                    outcome.pass ? "PASS" : "FAIL", entry.title,
                    outcome.detail.c_str());
        std::fflush(stdout);
    }
    const int total = int(sizeof(entries) / sizeof(entries[0]));
    std::printf("acceptance: %d of %d criteria passed\n", total - failures, total);
    return failures;
}
