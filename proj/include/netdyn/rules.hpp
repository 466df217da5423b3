#ifndef NETDYN_RULES_HPP
#define NETDYN_RULES_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netdyn/capture.hpp"

namespace netdyn {

/// Packet fields addressable from rule predicates.
enum class FieldId {
    IpSrc, IpDst, IpLen, IpMf, IpDf, IpOffset, IpOptionsLen, IpProto,
    TcpSport, TcpDport, TcpSeq, TcpAckNum,
    TcpUrg, TcpAck, TcpPsh, TcpRst, TcpSyn, TcpFin,
    UdpSport, UdpDport, UdpLen,
    IcmpType, IcmpCode,
};

enum class FieldKind { Flag, Int, Addr };

const char* field_name(FieldId id);
FieldKind field_kind(FieldId id);
std::optional<FieldId> field_by_name(std::string_view name);

/// Catalog parameter id behind a rule field (params.hpp ids); 0 when the
/// field has no catalog entry (ip.offset, tcp.seq, tcp.ack_num, udp.len).
int field_param_id(FieldId id);

/// Field value on a concrete packet; nullopt when the packet's protocol does
/// not carry the field.
std::optional<std::uint64_t> field_value(const DecodedPacket& packet, FieldId id);

enum class Cmp { Eq, Ne, Lt, Le, Gt, Ge, In };

struct RuleValue {
    enum class Kind { Int, Addr, Cidr, Field, List };
    Kind kind = Kind::Int;
    std::int64_t number = 0;      ///< Int
    std::uint32_t addr = 0;       ///< Addr / Cidr base
    int prefix = 32;              ///< Cidr
    FieldId field = FieldId::IpSrc; ///< Field
    std::vector<RuleValue> items; ///< List (Int/Addr/Cidr members only)
};

/// Boolean expression tree over packet fields. A bare flag atom means
/// "flag == 1". Any comparison touching a field the packet does not carry
/// evaluates to false.
struct RuleExpr {
    enum class Kind { Atom, Not, And, Or };
    Kind kind = Kind::Atom;
    // Atom
    FieldId field = FieldId::IpSrc;
    bool bare = false;
    Cmp cmp = Cmp::Eq;
    RuleValue value;
    // Not (1 child) / And / Or (2+ children)
    std::vector<RuleExpr> children;
};

enum class Severity { Low, Medium, High };
const char* to_string(Severity s);

struct SignatureRule {
    enum class Kind { PerPacket, WindowedCount };

    std::string name;
    Severity severity = Severity::Medium;
    Kind kind = Kind::PerPacket;
    RuleExpr predicate; ///< per-packet test, or the match expr inside count()
    // windowed_count only:
    FieldId group_by = FieldId::IpDst;
    double window_seconds = 0.0;
    std::int64_t threshold = 0; ///< alert on count strictly greater
};

/// Parse rule text (one rule per line, '#' comments). Throws RuleParseError
/// with 1-based line/column on syntax errors, unknown fields, and type
/// mismatches.
std::vector<SignatureRule> parse_rules(const std::string& text);

/// Render back to DSL form; parse(serialize(r)) is structurally equal to r.
std::string serialize_rule(const SignatureRule& rule);
std::string serialize_rules(const std::vector<SignatureRule>& rules);

bool expr_equal(const RuleExpr& a, const RuleExpr& b);
bool rule_equal(const SignatureRule& a, const SignatureRule& b);

/// Pure per-packet predicate evaluation. Throws Error when handed a
/// windowed_count rule.
bool eval_rule(const SignatureRule& rule, const DecodedPacket& packet);

struct Alert {
    double time = 0.0;
    std::string rule;
    Severity severity = Severity::Medium;
    std::optional<std::uint32_t> src, dst;
    std::optional<std::uint16_t> sport, dport;
    std::string flags;           ///< e.g. "SYN" / "ACK,PSH"
    std::string detail;
    std::uint64_t count = 0;     ///< windowed: observed count
    double window_seconds = 0.0; ///< windowed: window length
};

/// Tab-separated alert line: ISO-8601 time, rule, severity, src, dst, detail.
std::string alert_line(const Alert& alert);

/// Stateful evaluator for a rule set over a time-ordered packet stream.
/// Windowed rules keep a per-group sliding window of matching-packet times;
/// an alert fires when the in-window count first exceeds the threshold and
/// the rule re-arms for that group once the window drains back to or below
/// it (one alert per sustained episode).
class RuleEngine {
public:
    explicit RuleEngine(std::vector<SignatureRule> rules);

    /// Alerts fired by this packet. Packets must arrive in non-decreasing
    /// time order; more than 1 s of backwards jitter raises OrderingError.
    std::vector<Alert> on_packet(const DecodedPacket& packet);

    const std::vector<SignatureRule>& rules() const { return rules_; }

private:
    struct GroupState {
        std::deque<double> times;
        bool armed = true;
    };

    std::vector<SignatureRule> rules_;
    std::vector<std::map<std::uint64_t, GroupState>> groups_; // per rule
    double high_water_ = 0.0;
    bool saw_packet_ = false;
};

/// Run one windowed_count rule over a full stream.
std::vector<Alert> eval_windowed(const SignatureRule& rule,
                                 const std::vector<DecodedPacket>& packets);

/// The 14 classic attack signatures (see rules.cpp for the annotated DSL
/// source). The ack-scan probe is provided separately: it is not part of
/// this catalog's parameter-frequency accounting.
const std::vector<SignatureRule>& builtin_catalog();

/// Lone ACK flag with identical source and destination ports.
const SignatureRule& ack_scan_rule();

/// Annotated DSL text behind builtin_catalog().
const std::string& builtin_rules_text();

/// Rules-per-parameter usage counts over catalog ids 1..18 (every id is
/// present, zero when unused). A rule counts once per parameter no matter
/// how often its predicate repeats the field; the group-by key of a
/// windowed rule is an aggregation key, not a predicate reference, and does
/// not count.
std::map<int, int> param_usage_histogram(const std::vector<SignatureRule>& rules);

} // namespace netdyn

#endif // NETDYN_RULES_HPP
