// Test-side traffic forge: hand-assembled Ethernet/IPv4 frames, a classic
// pcap writer, and synthetic benign/attack packet streams. Everything here
// is independent of the library's decoder so the two sides can check each
// other.
#ifndef NETDYN_TESTS_NETGEN_HPP
#define NETDYN_TESTS_NETGEN_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace netgen {

constexpr std::uint8_t kFin = 0x01;
constexpr std::uint8_t kSyn = 0x02;
constexpr std::uint8_t kRst = 0x04;
constexpr std::uint8_t kPsh = 0x08;
constexpr std::uint8_t kAck = 0x10;
constexpr std::uint8_t kUrg = 0x20;

struct Packet {
    double time = 0.0;
    std::vector<std::uint8_t> frame;
    /// Override the record header lengths (to fake snaplen cuts etc.).
    std::optional<std::uint32_t> captured_length;
    std::optional<std::uint32_t> original_length;
};

struct IpFields {
    std::string src = "10.0.0.1";
    std::string dst = "10.0.0.2";
    bool df = false;
    bool mf = false;
    int frag_offset = 0; ///< units of 8 bytes
    std::vector<std::uint8_t> options; ///< length must be a multiple of 4
    int ttl = 64;

    IpFields() = default;
    IpFields(std::string src_addr, std::string dst_addr)
        : src(std::move(src_addr)), dst(std::move(dst_addr)) {}
};

std::vector<std::uint8_t> make_tcp_frame(const IpFields& ip, int sport, int dport,
                                         std::uint8_t flags, int payload = 0,
                                         std::uint32_t seq = 0,
                                         std::uint32_t ack_num = 0);
std::vector<std::uint8_t> make_udp_frame(const IpFields& ip, int sport, int dport,
                                         int payload = 0);
std::vector<std::uint8_t> make_icmp_frame(const IpFields& ip, int type, int code,
                                          int payload = 0);
/// IPv4 packet with a raw (already-built or headerless) protocol payload;
/// used for continuation fragments.
std::vector<std::uint8_t> make_raw_ipv4(const IpFields& ip, int proto,
                                        const std::vector<std::uint8_t>& l4);
/// Minimal ARP request frame (a non-IP ethertype).
std::vector<std::uint8_t> make_arp_frame();

/// Serialize packets as a classic pcap stream.
std::string pcap_bytes(const std::vector<Packet>& packets,
                       bool big_endian = false, bool nanosecond = false,
                       std::uint32_t snaplen = 65535,
                       std::uint32_t link_type = 1);
void write_pcap_file(const std::string& path, const std::vector<Packet>& packets,
                     bool big_endian = false, bool nanosecond = false,
                     std::uint32_t snaplen = 65535, std::uint32_t link_type = 1);

/// Mixed TCP/UDP/ICMP background traffic that triggers none of the builtin
/// signatures: full handshakes, ephemeral client ports, unicast addresses,
/// no fragments/options/URG, per-destination rates far below the windowed
/// thresholds. Times start at `start` and advance at ~`rate` packets/s.
std::vector<Packet> benign_traffic(std::size_t count, std::uint64_t seed,
                                   double start = 1023456789.0,
                                   double rate = 20.0);

/// The malicious flow for one builtin rule name ("land", "smurf", ...,
/// "stealth-scan"), starting at t0. Triggers exactly that one signature.
std::vector<Packet> attack_flow(const std::string& rule_name, double t0);

/// All builtin rule names attack_flow understands.
const std::vector<std::string>& attack_names();

/// Merge two packet streams into capture (time) order.
std::vector<Packet> merge_by_time(std::vector<Packet> a, std::vector<Packet> b);

} // namespace netgen

#endif // NETDYN_TESTS_NETGEN_HPP
