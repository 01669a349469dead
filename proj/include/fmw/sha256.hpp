#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/evp.h>

namespace fmw {

using Digest = std::array<unsigned char, 32>;

inline Digest sha256(const unsigned char* data, size_t len) {
    struct Ctx {
        EVP_MD_CTX* p = EVP_MD_CTX_new();
        ~Ctx() { EVP_MD_CTX_free(p); }
    };
    thread_local Ctx ctx;
    Digest out{};
    unsigned int outlen = 0;
    if (EVP_DigestInit_ex(ctx.p, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.p, data, len) != 1 ||
        EVP_DigestFinal_ex(ctx.p, out.data(), &outlen) != 1 || outlen != 32)
        throw std::runtime_error("sha256 failed");
    return out;
}

inline Digest sha256(const std::vector<unsigned char>& buf) {
    return sha256(buf.data(), buf.size());
}

inline std::string hex(const Digest& d) {
    static const char* tab = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (unsigned char b : d) {
        s.push_back(tab[b >> 4]);
        s.push_back(tab[b & 0xf]);
    }
    return s;
}

// Incremental buffer for building hash inputs out of tags, integers and
// child digests. Integers are encoded little-endian with a width prefix so
// that concatenations cannot collide.
class HashBuf {
public:
    void tag(char c) { buf_.push_back(static_cast<unsigned char>(c)); }

    void u32(uint32_t v) {
        buf_.push_back('i');
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
    }

    void u64(uint64_t v) {
        buf_.push_back('l');
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
    }

    void str(const std::string& s) {
        buf_.push_back('s');
        u32(static_cast<uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    void digest(const Digest& d) {
        buf_.push_back('d');
        buf_.insert(buf_.end(), d.begin(), d.end());
    }

    Digest finish() const { return sha256(buf_); }

private:
    std::vector<unsigned char> buf_;
};

} // namespace fmw
