#include "netdyn/params.hpp"

#include <sstream>

#include "netdyn/errors.hpp"
#include "netdyn/textio.hpp"

namespace netdyn {

const std::vector<CatalogEntry>& param_catalog()
{
    static const std::vector<CatalogEntry> catalog = {
        {param::ip_dst_addr, "IP", "Destination IP Address"},
        {param::ip_src_addr, "IP", "Source IP Address"},
        {param::ip_length, "IP", "Length"},
        {param::ip_mf_flag, "IP", "More Fragment Flag"},
        {param::ip_df_flag, "IP", "Don't Fragment Flag"},
        {param::ip_options, "IP", "Options"},
        {param::tcp_src_port, "TCP", "Source Port"},
        {param::tcp_dst_port, "TCP", "Destination Port"},
        {param::tcp_urg_flag, "TCP", "Urgent Flag"},
        {param::tcp_rst_flag, "TCP", "RST Flag"},
        {param::tcp_ack_flag, "TCP", "ACK Flag"},
        {param::tcp_syn_flag, "TCP", "SYN Flag"},
        {param::tcp_fin_flag, "TCP", "FIN Flag"},
        {param::udp_dst_port, "UDP", "Destination Port"},
        {param::udp_src_port, "UDP", "Source Port"},
        {param::icmp_type, "ICMP", "Type"},
        {param::icmp_code, "ICMP", "Code"},
        {param::ip_protocol_id, "IP", "Protocol type ID"},
    };
    return catalog;
}

std::vector<ParamSample> extract_params(const DecodedPacket& packet)
{
    std::vector<ParamSample> out;
    if (!packet.ip)
        return out;

    const double t = packet.time();
    const Ipv4View& ip = *packet.ip;
    auto emit = [&](int id, double value) { out.push_back({t, id, value}); };

    emit(param::ip_dst_addr, static_cast<double>(ip.dst_addr));
    emit(param::ip_src_addr, static_cast<double>(ip.src_addr));
    emit(param::ip_length, static_cast<double>(ip.total_length));
    emit(param::ip_mf_flag, ip.mf_flag ? 1.0 : 0.0);
    emit(param::ip_df_flag, ip.df_flag ? 1.0 : 0.0);
    emit(param::ip_options, static_cast<double>(ip.options_bytes.size()));

    if (const TcpView* tcp = packet.tcp()) {
        emit(param::tcp_src_port, tcp->src_port);
        emit(param::tcp_dst_port, tcp->dst_port);
        emit(param::tcp_urg_flag, tcp->flags.urg ? 1.0 : 0.0);
        emit(param::tcp_rst_flag, tcp->flags.rst ? 1.0 : 0.0);
        emit(param::tcp_ack_flag, tcp->flags.ack ? 1.0 : 0.0);
        emit(param::tcp_syn_flag, tcp->flags.syn ? 1.0 : 0.0);
        emit(param::tcp_fin_flag, tcp->flags.fin ? 1.0 : 0.0);
    } else if (const UdpView* udp = packet.udp()) {
        emit(param::udp_dst_port, udp->dst_port);
        emit(param::udp_src_port, udp->src_port);
    } else if (const IcmpView* icmp = packet.icmp()) {
        emit(param::icmp_type, icmp->type);
        emit(param::icmp_code, icmp->code);
    }

    emit(param::ip_protocol_id, ip.protocol_id);
    return out;
}

std::string samples_to_csv(const std::vector<ParamSample>& samples)
{
    std::string out = "time,param_id,value\n";
    for (const ParamSample& s : samples) {
        out += format_number(s.time);
        out += ',';
        out += std::to_string(s.param);
        out += ',';
        out += format_number(s.value);
        out += '\n';
    }
    return out;
}

std::vector<ParamSample> samples_from_csv(const std::string& text)
{
    std::vector<ParamSample> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (lineno == 1 && line.rfind("time,", 0) == 0)
            continue;
        auto fields = split_csv(line);
        if (fields.size() != 3)
            throw IoError("samples CSV line " + std::to_string(lineno) +
                          ": expected time,param_id,value");
        auto t = parse_double(fields[0]);
        auto id = parse_int(fields[1]);
        auto v = parse_double(fields[2]);
        if (!t || !id || !v)
            throw IoError("samples CSV line " + std::to_string(lineno) +
                          ": malformed number");
        out.push_back({*t, static_cast<int>(*id), *v});
    }
    return out;
}

} // namespace netdyn
