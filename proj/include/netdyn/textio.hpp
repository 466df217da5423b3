#ifndef NETDYN_TEXTIO_HPP
#define NETDYN_TEXTIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace netdyn {

/// Shortest round-trip decimal form of a double ("5" not "5.000000").
std::string format_number(double v);

/// 32-bit address as dotted quad, big-endian interpretation (10.0.0.1 <-> 0x0a000001).
std::string format_addr(std::uint32_t addr);

/// Parse dotted quad; nullopt if not a.b.c.d with each octet in 0..255.
std::optional<std::uint32_t> parse_addr(std::string_view text);

/// Epoch seconds (fractional) -> ISO-8601 UTC with microseconds,
/// e.g. 2002-06-01T12:00:00.000341Z.
std::string format_iso8601(double epoch_seconds);

/// Split one CSV line on commas. No quoting: the toolkit's CSV files are
/// purely numeric.
std::vector<std::string_view> split_csv(std::string_view line);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

/// Read a whole file; throws IoError on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace netdyn

#endif // NETDYN_TEXTIO_HPP
