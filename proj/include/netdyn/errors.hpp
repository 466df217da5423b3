#ifndef NETDYN_ERRORS_HPP
#define NETDYN_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netdyn {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input is not a classic pcap stream (bad magic, no global header).
class UnsupportedFormatError : public Error {
public:
    using Error::Error;
};

/// Capture file ends mid-header or mid-record.
class TruncatedFileError : public Error {
public:
    TruncatedFileError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Frame too short for its declared layers, or unsupported link type.
class DecodeError : public Error {
public:
    using Error::Error;
};

/// Structurally invalid header field (e.g. IPv4 IHL < 5).
class MalformedHeaderError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

class WindowTooLargeError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class DegenerateSeriesError : public Error {
public:
    using Error::Error;
};

/// Point dimensionality does not match the model it is scored against.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Rule text rejected; carries 1-based line/column of the offending token.
class RuleParseError : public Error {
public:
    RuleParseError(const std::string& what, int line, int col)
        : Error("line " + std::to_string(line) + ", col " + std::to_string(col) +
                ": " + what),
          line_(line), col_(col) {}
    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

/// Packet stream violated the non-decreasing-time contract.
class OrderingError : public Error {
public:
    using Error::Error;
};

/// Monitor window configuration rejected.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File/CSV read or write failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace netdyn

#endif // NETDYN_ERRORS_HPP
