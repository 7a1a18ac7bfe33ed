#include "amgae/binio.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <fstream>

namespace fs = std::filesystem;

namespace amgae::binio {

void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

void put_string(std::string& buf, std::string_view s) {
    put_u32(buf, static_cast<std::uint32_t>(s.size()));
    buf.append(s);
}

void Reader::need(std::size_t n) {
    if (pos_ + n > bytes_.size())
        throw std::runtime_error("binary read past end of file (corrupt or truncated)");
}

std::uint8_t Reader::u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
}

std::uint32_t Reader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_++])) << (8 * i);
    return v;
}

std::uint64_t Reader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_++])) << (8 * i);
    return v;
}

double Reader::f64() { return std::bit_cast<double>(u64()); }

std::string Reader::string() {
    std::uint32_t len = u32();
    need(len);
    std::string s(bytes_.substr(pos_, len));
    pos_ += len;
    return s;
}

std::uint32_t crc32(std::string_view bytes) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (char ch : bytes)
        crc = table[(crc ^ static_cast<std::uint8_t>(ch)) & 0xFF] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    const fs::path tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

void write_file_checksummed(const fs::path& path, std::string body) {
    put_u32(body, crc32(body));
    write_file_atomic(path, body);
}

std::string read_file_checksummed(const fs::path& path) {
    std::string bytes = read_file(path);
    if (bytes.size() < 4) throw std::runtime_error("file too short: " + path.string());
    std::string_view body(bytes.data(), bytes.size() - 4);
    Reader tail(std::string_view(bytes.data() + bytes.size() - 4, 4));
    if (tail.u32() != crc32(body))
        throw std::runtime_error("checksum mismatch (corrupt file): " + path.string());
    bytes.resize(bytes.size() - 4);
    return bytes;
}

}  // namespace amgae::binio
