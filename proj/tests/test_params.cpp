// Static-parameter catalog and per-packet extraction.
#include "doctest.h"

#include <sstream>
#include <vector>

#include "netdyn/capture.hpp"
#include "netdyn/errors.hpp"
#include "netdyn/params.hpp"

#include "support/netgen.hpp"

using namespace netdyn;

namespace {

DecodedPacket decode_frame(const std::vector<std::uint8_t>& frame,
                           double time = 7.25)
{
    netgen::Packet pkt;
    pkt.time = time;
    pkt.frame = frame;
    std::istringstream in(netgen::pcap_bytes({pkt}));
    PcapContents contents = read_capture(in);
    REQUIRE(contents.records.size() == 1);
    return decode_packet(contents.records[0], contents.link_type);
}

std::vector<int> ids_of(const std::vector<ParamSample>& samples)
{
    std::vector<int> ids;
    for (const ParamSample& s : samples)
        ids.push_back(s.param);
    return ids;
}

double value_of(const std::vector<ParamSample>& samples, int id)
{
    for (const ParamSample& s : samples)
        if (s.param == id)
            return s.value;
    FAIL("parameter ", id, " not extracted");
    return -1.0;
}

} // namespace

TEST_CASE("catalog lists the 18 static parameters in id order")
{
    const auto& catalog = param_catalog();
    REQUIRE(catalog.size() == 18);
    for (std::size_t i = 0; i < catalog.size(); ++i)
        CHECK(catalog[i].id == static_cast<int>(i) + 1);

    struct Expected {
        const char* protocol;
        const char* parameter;
    };
    const Expected expected[18] = {
        {"IP", "Destination IP Address"},
        {"IP", "Source IP Address"},
        {"IP", "Length"},
        {"IP", "More Fragment Flag"},
        {"IP", "Don't Fragment Flag"},
        {"IP", "Options"},
        {"TCP", "Source Port"},
        {"TCP", "Destination Port"},
        {"TCP", "Urgent Flag"},
        {"TCP", "RST Flag"},
        {"TCP", "ACK Flag"},
        {"TCP", "SYN Flag"},
        {"TCP", "FIN Flag"},
        {"UDP", "Destination Port"},
        {"UDP", "Source Port"},
        {"ICMP", "Type"},
        {"ICMP", "Code"},
        {"IP", "Protocol type ID"},
    };
    for (std::size_t i = 0; i < 18; ++i) {
        CAPTURE(i);
        CHECK(catalog[i].protocol == expected[i].protocol);
        CHECK(catalog[i].parameter == expected[i].parameter);
    }
}

TEST_CASE("TCP packet yields the IP and TCP parameters, ascending")
{
    netgen::IpFields ip("10.0.0.1", "192.168.200.17");
    ip.df = true;
    auto packet = decode_frame(
        netgen::make_tcp_frame(ip, 49152, 443, netgen::kSyn | netgen::kUrg, 5));
    auto samples = extract_params(packet);

    CHECK(ids_of(samples) ==
          std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 18});
    for (const ParamSample& s : samples)
        CHECK(s.time == doctest::Approx(7.25).epsilon(1e-9));

    // Addresses are the big-endian 32-bit values.
    CHECK(value_of(samples, param::ip_dst_addr) ==
          double((192u << 24) | (168u << 16) | (200u << 8) | 17u));
    CHECK(value_of(samples, param::ip_src_addr) == double(10u << 24 | 1u));
    // 20 IP + 20 TCP + 5 payload bytes.
    CHECK(value_of(samples, param::ip_length) == 45.0);
    CHECK(value_of(samples, param::ip_mf_flag) == 0.0);
    CHECK(value_of(samples, param::ip_df_flag) == 1.0);
    CHECK(value_of(samples, param::ip_options) == 0.0);
    CHECK(value_of(samples, param::tcp_src_port) == 49152.0);
    CHECK(value_of(samples, param::tcp_dst_port) == 443.0);
    CHECK(value_of(samples, param::tcp_urg_flag) == 1.0);
    CHECK(value_of(samples, param::tcp_rst_flag) == 0.0);
    CHECK(value_of(samples, param::tcp_ack_flag) == 0.0);
    CHECK(value_of(samples, param::tcp_syn_flag) == 1.0);
    CHECK(value_of(samples, param::tcp_fin_flag) == 0.0);
    CHECK(value_of(samples, param::ip_protocol_id) == 6.0);
}

TEST_CASE("UDP packet yields the IP and UDP parameters")
{
    auto packet = decode_frame(
        netgen::make_udp_frame(netgen::IpFields("172.16.3.4", "172.16.3.5"),
                               5353, 53, 11));
    auto samples = extract_params(packet);

    CHECK(ids_of(samples) == std::vector<int>{1, 2, 3, 4, 5, 6, 14, 15, 18});
    CHECK(value_of(samples, param::udp_dst_port) == 53.0);
    CHECK(value_of(samples, param::udp_src_port) == 5353.0);
    // 20 IP + 8 UDP + 11 payload bytes.
    CHECK(value_of(samples, param::ip_length) == 39.0);
    CHECK(value_of(samples, param::ip_protocol_id) == 17.0);
}

TEST_CASE("ICMP packet yields the IP and ICMP parameters")
{
    auto packet = decode_frame(
        netgen::make_icmp_frame(netgen::IpFields("10.1.1.1", "10.1.1.2"), 8, 0, 4));
    auto samples = extract_params(packet);

    CHECK(ids_of(samples) == std::vector<int>{1, 2, 3, 4, 5, 6, 16, 17, 18});
    CHECK(value_of(samples, param::icmp_type) == 8.0);
    CHECK(value_of(samples, param::icmp_code) == 0.0);
    CHECK(value_of(samples, param::ip_protocol_id) == 1.0);
}

TEST_CASE("IP options contribute their byte length")
{
    netgen::IpFields ip("10.2.0.1", "10.2.0.2");
    ip.options = {0x44, 0x08, 0x05, 0x00, 0x00, 0x00, 0x00, 0x00}; // 8 bytes
    auto packet = decode_frame(netgen::make_icmp_frame(ip, 13, 0, 0));
    auto samples = extract_params(packet);
    CHECK(value_of(samples, param::ip_options) == 8.0);
}

TEST_CASE("non-initial fragment yields only the IP-level parameters")
{
    netgen::IpFields ip("10.3.0.1", "10.3.0.2");
    ip.mf = true;
    ip.frag_offset = 185;
    auto packet = decode_frame(
        netgen::make_raw_ipv4(ip, 17, std::vector<std::uint8_t>(24, 0xab)));
    REQUIRE(packet.ip.has_value());
    CHECK(packet.udp() == nullptr);

    auto samples = extract_params(packet);
    CHECK(ids_of(samples) == std::vector<int>{1, 2, 3, 4, 5, 6, 18});
    CHECK(value_of(samples, param::ip_mf_flag) == 1.0);
    CHECK(value_of(samples, param::ip_protocol_id) == 17.0);
}

TEST_CASE("non-IP frame yields no parameters")
{
    auto packet = decode_frame(netgen::make_arp_frame());
    CHECK(!packet.ip.has_value());
    CHECK(extract_params(packet).empty());
}

TEST_CASE("unknown transport protocol still yields the IP parameters")
{
    // Protocol 47 (GRE) is not one of TCP/UDP/ICMP.
    auto packet = decode_frame(
        netgen::make_raw_ipv4(netgen::IpFields("10.4.0.1", "10.4.0.2"), 47,
                              std::vector<std::uint8_t>(16, 0)));
    auto samples = extract_params(packet);
    CHECK(ids_of(samples) == std::vector<int>{1, 2, 3, 4, 5, 6, 18});
    CHECK(value_of(samples, param::ip_protocol_id) == 47.0);
}

TEST_CASE("samples survive a CSV round trip")
{
    std::vector<ParamSample> samples = {
        {1023456789.000123, param::ip_dst_addr, 3232286737.0},
        {1023456789.000123, param::ip_length, 45.0},
        {1023456790.5, param::tcp_syn_flag, 1.0},
        {1023456791.25, param::ip_protocol_id, 6.0},
    };
    std::string csv = samples_to_csv(samples);
    CHECK(csv.rfind("time,param_id,value\n", 0) == 0);

    auto back = samples_from_csv(csv);
    REQUIRE(back.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CAPTURE(i);
        CHECK(back[i].time == samples[i].time);
        CHECK(back[i].param == samples[i].param);
        CHECK(back[i].value == samples[i].value);
    }
}

TEST_CASE("extraction output round-trips through CSV byte-identically")
{
    auto packet = decode_frame(netgen::make_tcp_frame(
        netgen::IpFields("10.0.0.1", "10.0.0.2"), 49321, 80,
        netgen::kSyn | netgen::kAck));
    auto samples = extract_params(packet);
    std::string csv = samples_to_csv(samples);
    CHECK(samples_to_csv(samples_from_csv(csv)) == csv);
}

TEST_CASE("empty sample list serializes to just the header")
{
    CHECK(samples_to_csv({}) == "time,param_id,value\n");
    CHECK(samples_from_csv("time,param_id,value\n").empty());
    CHECK(samples_from_csv("").empty());
}

TEST_CASE("malformed CSV rows are rejected")
{
    CHECK_THROWS_AS(samples_from_csv("time,param_id,value\n1.0,2\n"), IoError);
    CHECK_THROWS_AS(samples_from_csv("time,param_id,value\n1.0,two,3\n"), IoError);
    CHECK_THROWS_AS(samples_from_csv("oops\n"), IoError);
}
