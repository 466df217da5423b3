#ifndef NETDYN_CAPTURE_HPP
#define NETDYN_CAPTURE_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace netdyn {

/// One raw record from a classic pcap file. Timestamps are kept at
/// microsecond resolution; nanosecond captures are down-converted on read.
struct CaptureRecord {
    std::uint32_t ts_sec = 0;
    std::uint32_t ts_usec = 0;
    std::uint32_t captured_length = 0;
    std::uint32_t original_length = 0;
    std::vector<std::uint8_t> payload;
    /// Set when incl_len > orig_len in the record header.
    bool truncated_inconsistent = false;

    double time() const { return ts_sec + ts_usec * 1e-6; }
};

struct TcpFlags {
    bool urg = false;
    bool ack = false;
    bool psh = false;
    bool rst = false;
    bool syn = false;
    bool fin = false;
};

struct TcpView {
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint32_t seq = 0;
    std::uint32_t ack_num = 0;
    TcpFlags flags;
};

struct UdpView {
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint16_t length = 0;
};

struct IcmpView {
    std::uint8_t type = 0;
    std::uint8_t code = 0;
};

struct Ipv4View {
    std::uint32_t src_addr = 0;
    std::uint32_t dst_addr = 0;
    std::uint16_t total_length = 0;
    std::uint8_t protocol_id = 0;
    bool df_flag = false;
    bool mf_flag = false;
    std::uint16_t fragment_offset = 0; ///< in units of 8 bytes (13-bit field)
    bool has_options = false;
    std::vector<std::uint8_t> options_bytes;
};

using Transport = std::variant<std::monostate, TcpView, UdpView, IcmpView>;

/// Fully parsed view of one captured frame. All multi-byte fields are
/// interpreted network byte order. Non-IPv4 frames keep ip == nullopt.
struct DecodedPacket {
    std::uint32_t ts_sec = 0;
    std::uint32_t ts_usec = 0;
    std::uint16_t ethertype = 0;
    std::optional<Ipv4View> ip;
    Transport transport;
    /// captured_length cut the transport header short; transport left empty.
    bool transport_truncated = false;

    double time() const { return ts_sec + ts_usec * 1e-6; }
    const TcpView* tcp() const { return std::get_if<TcpView>(&transport); }
    const UdpView* udp() const { return std::get_if<UdpView>(&transport); }
    const IcmpView* icmp() const { return std::get_if<IcmpView>(&transport); }
};

/// Streaming reader over a classic pcap byte stream. Detects byte order and
/// the microsecond/nanosecond magic from the 24-byte global header.
class PcapReader {
public:
    explicit PcapReader(std::istream& in);

    std::uint32_t link_type() const { return link_type_; }
    std::uint32_t snaplen() const { return snaplen_; }
    bool swapped() const { return swapped_; }
    bool nanosecond() const { return nanosecond_; }

    /// Next record in file order; nullopt at clean end of file.
    /// Throws TruncatedFileError when the stream ends mid-record.
    std::optional<CaptureRecord> next();

private:
    std::istream& in_;
    std::uint64_t offset_ = 0;
    std::uint32_t link_type_ = 0;
    std::uint32_t snaplen_ = 0;
    bool swapped_ = false;
    bool nanosecond_ = false;
};

struct PcapContents {
    std::uint32_t link_type = 0;
    std::vector<CaptureRecord> records;
};

/// Read a whole pcap stream into memory.
PcapContents read_capture(std::istream& in);
PcapContents read_capture_file(const std::string& path);

inline constexpr std::uint32_t kLinkTypeEthernet = 1;

/// Parse one Ethernet frame. Throws DecodeError / MalformedHeaderError as
/// described in the header comments of the individual layers; a transport
/// header cut off by the snap length yields transport = none with
/// transport_truncated set instead of an error.
DecodedPacket decode_packet(const CaptureRecord& record, std::uint32_t link_type);

} // namespace netdyn

#endif // NETDYN_CAPTURE_HPP
