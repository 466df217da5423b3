#include "netdyn/capture.hpp"

#include <cstring>
#include <fstream>

#include "netdyn/errors.hpp"

namespace netdyn {

namespace {

constexpr std::uint32_t kMagicMicros = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNanos = 0xa1b23c4d;

std::uint32_t swap32(std::uint32_t v)
{
    return ((v & 0x000000ffu) << 24) | ((v & 0x0000ff00u) << 8) |
           ((v & 0x00ff0000u) >> 8) | ((v & 0xff000000u) >> 24);
}

std::uint32_t read_u32(const std::uint8_t* p, bool swapped)
{
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return swapped ? swap32(v) : v;
}

std::uint16_t be16(const std::uint8_t* p)
{
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

std::uint32_t be32(const std::uint8_t* p)
{
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

} // namespace

PcapReader::PcapReader(std::istream& in) : in_(in)
{
    std::uint8_t header[24];
    in_.read(reinterpret_cast<char*>(header), sizeof(header));
    auto got = static_cast<std::size_t>(in_.gcount());
    if (got == 0)
        throw UnsupportedFormatError("empty stream: no pcap global header");
    if (got < sizeof(header))
        throw TruncatedFileError("pcap global header cut short", got);

    std::uint32_t magic;
    std::memcpy(&magic, header, 4);
    if (magic == kMagicMicros) {
        swapped_ = false;
        nanosecond_ = false;
    } else if (magic == swap32(kMagicMicros)) {
        swapped_ = true;
        nanosecond_ = false;
    } else if (magic == kMagicNanos) {
        swapped_ = false;
        nanosecond_ = true;
    } else if (magic == swap32(kMagicNanos)) {
        swapped_ = true;
        nanosecond_ = true;
    } else {
        throw UnsupportedFormatError("not a classic pcap stream (bad magic)");
    }
    snaplen_ = read_u32(header + 16, swapped_);
    link_type_ = read_u32(header + 20, swapped_);
    offset_ = sizeof(header);
}

std::optional<CaptureRecord> PcapReader::next()
{
    std::uint8_t header[16];
    in_.read(reinterpret_cast<char*>(header), sizeof(header));
    auto got = static_cast<std::size_t>(in_.gcount());
    if (got == 0)
        return std::nullopt;
    if (got < sizeof(header))
        throw TruncatedFileError("pcap record header cut short", offset_);

    CaptureRecord rec;
    rec.ts_sec = read_u32(header + 0, swapped_);
    std::uint32_t frac = read_u32(header + 4, swapped_);
    // Nanosecond captures are down-converted; all downstream binning is at
    // microsecond scale or coarser.
    rec.ts_usec = nanosecond_ ? frac / 1000 : frac;
    rec.captured_length = read_u32(header + 8, swapped_);
    rec.original_length = read_u32(header + 12, swapped_);
    rec.truncated_inconsistent = rec.captured_length > rec.original_length;

    rec.payload.resize(rec.captured_length);
    if (rec.captured_length > 0) {
        in_.read(reinterpret_cast<char*>(rec.payload.data()), rec.captured_length);
        if (static_cast<std::uint32_t>(in_.gcount()) < rec.captured_length)
            throw TruncatedFileError("pcap record body cut short", offset_ + sizeof(header));
    }
    offset_ += sizeof(header) + rec.captured_length;
    return rec;
}

PcapContents read_capture(std::istream& in)
{
    PcapReader reader(in);
    PcapContents out;
    out.link_type = reader.link_type();
    while (auto rec = reader.next())
        out.records.push_back(std::move(*rec));
    return out;
}

PcapContents read_capture_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    return read_capture(in);
}

DecodedPacket decode_packet(const CaptureRecord& record, std::uint32_t link_type)
{
    if (link_type != kLinkTypeEthernet)
        throw DecodeError("unsupported link type " + std::to_string(link_type) +
                          " (only Ethernet is handled)");

    const std::uint8_t* data = record.payload.data();
    const std::size_t len = record.payload.size();
    if (len < 14)
        throw DecodeError("frame shorter than the 14-byte Ethernet header");

    DecodedPacket pkt;
    pkt.ts_sec = record.ts_sec;
    pkt.ts_usec = record.ts_usec;
    pkt.ethertype = be16(data + 12);
    if (pkt.ethertype != 0x0800)
        return pkt; // ARP, IPv6, ... : counted by callers, not analyzed

    const std::uint8_t* ip = data + 14;
    const std::size_t ip_avail = len - 14;
    if (ip_avail < 20)
        throw DecodeError("frame too short for the declared IPv4 layer");

    const unsigned version = ip[0] >> 4;
    const unsigned ihl = ip[0] & 0x0f;
    if (version != 4)
        throw MalformedHeaderError("ethertype 0x0800 but IP version " +
                                   std::to_string(version));
    if (ihl < 5)
        throw MalformedHeaderError("IPv4 IHL " + std::to_string(ihl) + " < 5");
    const std::size_t header_len = ihl * 4u;
    if (ip_avail < header_len)
        throw DecodeError("IPv4 header (incl. options) extends past captured data");

    Ipv4View view;
    view.total_length = be16(ip + 2);
    const std::uint16_t flags_frag = be16(ip + 6);
    view.df_flag = (flags_frag & 0x4000) != 0;
    view.mf_flag = (flags_frag & 0x2000) != 0;
    view.fragment_offset = flags_frag & 0x1fff;
    view.protocol_id = ip[9];
    view.src_addr = be32(ip + 12);
    view.dst_addr = be32(ip + 16);
    if (header_len > 20) {
        view.has_options = true;
        view.options_bytes.assign(ip + 20, ip + header_len);
    }
    pkt.ip = std::move(view);

    const Ipv4View& v = *pkt.ip;
    // Continuation fragments carry payload, not a transport header.
    if (v.fragment_offset != 0)
        return pkt;

    const std::uint8_t* tr = ip + header_len;
    std::size_t tr_avail = ip_avail - header_len;
    // Ethernet padding past the IP total length is not transport data.
    if (v.total_length >= header_len) {
        std::size_t declared = v.total_length - header_len;
        if (declared < tr_avail)
            tr_avail = declared;
    } else {
        tr_avail = 0;
    }

    switch (v.protocol_id) {
    case 6: { // TCP
        if (tr_avail < 20) {
            pkt.transport_truncated = true;
            break;
        }
        TcpView tcp;
        tcp.src_port = be16(tr + 0);
        tcp.dst_port = be16(tr + 2);
        tcp.seq = be32(tr + 4);
        tcp.ack_num = be32(tr + 8);
        const std::uint8_t fl = tr[13];
        tcp.flags.fin = (fl & 0x01) != 0;
        tcp.flags.syn = (fl & 0x02) != 0;
        tcp.flags.rst = (fl & 0x04) != 0;
        tcp.flags.psh = (fl & 0x08) != 0;
        tcp.flags.ack = (fl & 0x10) != 0;
        tcp.flags.urg = (fl & 0x20) != 0;
        pkt.transport = tcp;
        break;
    }
    case 17: { // UDP
        if (tr_avail < 8) {
            pkt.transport_truncated = true;
            break;
        }
        UdpView udp;
        udp.src_port = be16(tr + 0);
        udp.dst_port = be16(tr + 2);
        udp.length = be16(tr + 4);
        pkt.transport = udp;
        break;
    }
    case 1: { // ICMP
        if (tr_avail < 4) {
            pkt.transport_truncated = true;
            break;
        }
        IcmpView icmp;
        icmp.type = tr[0];
        icmp.code = tr[1];
        pkt.transport = icmp;
        break;
    }
    default:
        break; // other IP protocols: header parameters only
    }
    return pkt;
}

} // namespace netdyn
