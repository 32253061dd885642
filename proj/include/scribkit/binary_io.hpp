#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "scribkit/error.hpp"

namespace scribkit {

/// Little-endian binary stream helpers shared by the FBK1 / PAM1 / RFC1
/// container formats. All reads fail hard on truncation instead of
/// returning partial payloads.
class BinaryReader {
public:
    explicit BinaryReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw Error(Errc::io_error, "cannot open " + path);
    }

    void expect_magic(const char magic[4]) {
        char buf[4];
        read_raw(buf, 4);
        if (std::memcmp(buf, magic, 4) != 0)
            throw Error(Errc::format_error, path_ + ": bad magic (expected " +
                                                std::string(magic, 4) + ")");
    }

    uint16_t read_u16() {
        uint8_t b[2];
        read_raw(b, 2);
        return uint16_t(b[0] | b[1] << 8);
    }

    uint32_t read_u32() {
        uint8_t b[4];
        read_raw(b, 4);
        return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
    }

    uint64_t read_u64() {
        uint64_t lo = read_u32();
        uint64_t hi = read_u32();
        return lo | hi << 32;
    }

    float read_f32() { return std::bit_cast<float>(read_u32()); }

    void read_f32_array(float* out, size_t count) {
        for (size_t i = 0; i < count; ++i) out[i] = read_f32();
    }

    bool at_eof() {
        in_.peek();
        return in_.eof();
    }

private:
    void read_raw(void* dst, size_t count) {
        in_.read(static_cast<char*>(dst), std::streamsize(count));
        if (size_t(in_.gcount()) != count)
            throw Error(Errc::format_error, path_ + ": truncated file");
    }

    std::string path_;
    std::ifstream in_;
};

class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw Error(Errc::io_error, "cannot open " + path + " for writing");
    }

    void write_magic(const char magic[4]) { out_.write(magic, 4); }

    void write_u16(uint16_t v) {
        uint8_t b[2] = {uint8_t(v), uint8_t(v >> 8)};
        out_.write(reinterpret_cast<const char*>(b), 2);
    }

    void write_u32(uint32_t v) {
        uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
        out_.write(reinterpret_cast<const char*>(b), 4);
    }

    void write_u64(uint64_t v) {
        write_u32(uint32_t(v));
        write_u32(uint32_t(v >> 32));
    }

    void write_f32(float v) { write_u32(std::bit_cast<uint32_t>(v)); }

    void write_f32_array(const float* data, size_t count) {
        for (size_t i = 0; i < count; ++i) write_f32(data[i]);
    }

    void finish() {
        out_.flush();
        if (!out_) throw Error(Errc::io_error, "write failed: " + path_);
    }

private:
    std::string path_;
    std::ofstream out_;
};

} // namespace scribkit
