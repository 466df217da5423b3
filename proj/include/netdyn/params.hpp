#ifndef NETDYN_PARAMS_HPP
#define NETDYN_PARAMS_HPP

#include <string>
#include <vector>

#include "netdyn/capture.hpp"

namespace netdyn {

/// Static-parameter ids. 1..17 are the classic signature-parameter catalog;
/// 18 is the IP protocol-type ID used for the time-series demonstrations.
namespace param {
inline constexpr int ip_dst_addr = 1;
inline constexpr int ip_src_addr = 2;
inline constexpr int ip_length = 3;
inline constexpr int ip_mf_flag = 4;
inline constexpr int ip_df_flag = 5;
inline constexpr int ip_options = 6;
inline constexpr int tcp_src_port = 7;
inline constexpr int tcp_dst_port = 8;
inline constexpr int tcp_urg_flag = 9;
inline constexpr int tcp_rst_flag = 10;
inline constexpr int tcp_ack_flag = 11;
inline constexpr int tcp_syn_flag = 12;
inline constexpr int tcp_fin_flag = 13;
inline constexpr int udp_dst_port = 14;
inline constexpr int udp_src_port = 15;
inline constexpr int icmp_type = 16;
inline constexpr int icmp_code = 17;
inline constexpr int ip_protocol_id = 18;
inline constexpr int count = 18;
} // namespace param

struct CatalogEntry {
    int id = 0;
    std::string protocol;  ///< IP / TCP / UDP / ICMP
    std::string parameter; ///< field name, e.g. "Destination IP Address"
};

/// All 18 catalog entries in id order.
const std::vector<CatalogEntry>& param_catalog();

/// One static parameter observed at one packet's capture time. Addresses are
/// big-endian 32-bit unsigned values, flags 0/1, IP options their byte
/// length; everything else is the field's integer value.
struct ParamSample {
    double time = 0.0;
    int param = 0;
    double value = 0.0;
};

/// Every applicable catalog parameter for one decoded packet, in ascending
/// id order. Non-IPv4 packets yield an empty list.
std::vector<ParamSample> extract_params(const DecodedPacket& packet);

/// CSV export, columns time,param_id,value, with a header row.
std::string samples_to_csv(const std::vector<ParamSample>& samples);
std::vector<ParamSample> samples_from_csv(const std::string& text);

} // namespace netdyn

#endif // NETDYN_PARAMS_HPP
