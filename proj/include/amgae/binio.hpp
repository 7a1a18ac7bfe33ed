#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace amgae::binio {

// Little-endian byte serialization, independent of host endianness. Files are
// built in memory, checksummed, and written atomically (temp + rename).

inline void put_u8(std::string& buf, std::uint8_t v) { buf.push_back(static_cast<char>(v)); }

inline void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_i64(std::string& buf, std::int64_t v) {
    put_u64(buf, static_cast<std::uint64_t>(v));
}

void put_f64(std::string& buf, double v);
void put_string(std::string& buf, std::string_view s);  // u32 length prefix

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64();
    std::string string();  // u32 length prefix
    bool at_end() const { return pos_ == bytes_.size(); }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n);
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32(std::string_view bytes);

// Appends a CRC32 of everything before it, then writes via temp file + rename.
void write_file_checksummed(const std::filesystem::path& path, std::string body);

// Reads a file, validates and strips the trailing CRC32.
std::string read_file_checksummed(const std::filesystem::path& path);

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace amgae::binio
