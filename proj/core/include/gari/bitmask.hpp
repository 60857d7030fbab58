#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gari {

// Fixed-width bit set keyed by index (used for logical observable sets).
// XOR composition and equality are the only operations that matter on the
// hot path, so the representation is a plain packed word array.
class BitMask {
public:
    BitMask() = default;

    explicit BitMask(std::size_t num_bits)
        : num_bits_(num_bits), words_((num_bits + 63) / 64, 0) {}

    static BitMask from_indices(std::size_t num_bits,
                                const std::vector<std::uint32_t>& indices) {
        BitMask m(num_bits);
        for (std::uint32_t i : indices) m.set(i);
        return m;
    }

    std::size_t size_bits() const { return num_bits_; }

    void set(std::size_t i) {
        check_index(i);
        words_[i >> 6] |= (std::uint64_t{1} << (i & 63));
    }

    void toggle(std::size_t i) {
        check_index(i);
        words_[i >> 6] ^= (std::uint64_t{1} << (i & 63));
    }

    bool test(std::size_t i) const {
        check_index(i);
        return (words_[i >> 6] >> (i & 63)) & 1;
    }

    BitMask& operator^=(const BitMask& other) {
        if (other.num_bits_ != num_bits_)
            throw std::invalid_argument("BitMask width mismatch in xor");
        for (std::size_t w = 0; w < words_.size(); ++w)
            words_[w] ^= other.words_[w];
        return *this;
    }

    friend BitMask operator^(BitMask a, const BitMask& b) { return a ^= b; }

    bool operator==(const BitMask&) const = default;

    // Lexicographic on (width, low-to-high words); total order for use as
    // a deterministic sort key.
    bool operator<(const BitMask& other) const {
        if (num_bits_ != other.num_bits_) return num_bits_ < other.num_bits_;
        return words_ < other.words_;
    }

    bool any() const {
        for (std::uint64_t w : words_)
            if (w) return true;
        return false;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (std::uint64_t w : words_) n += std::popcount(w);
        return n;
    }

    std::vector<std::uint32_t> indices() const {
        std::vector<std::uint32_t> out;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                const int b = std::countr_zero(bits);
                out.push_back(static_cast<std::uint32_t>(w * 64 + b));
                bits &= bits - 1;
            }
        }
        return out;
    }

    // Hex rendering of the mask as an unsigned integer, bit i = index i.
    std::string to_hex() const {
        static const char digits[] = "0123456789abcdef";
        std::string out;
        bool leading = true;
        for (std::size_t w = words_.size(); w-- > 0;) {
            for (int shift = 60; shift >= 0; shift -= 4) {
                const unsigned nibble = (words_[w] >> shift) & 0xf;
                if (leading && nibble == 0) continue;
                leading = false;
                out.push_back(digits[nibble]);
            }
        }
        if (out.empty()) out = "0";
        return "0x" + out;
    }

    static BitMask from_hex(std::size_t num_bits, std::string_view hex) {
        if (hex.substr(0, 2) == "0x" || hex.substr(0, 2) == "0X")
            hex.remove_prefix(2);
        if (hex.empty())
            throw std::invalid_argument("empty hex mask");
        BitMask m(num_bits);
        std::size_t bit = 0;
        for (std::size_t i = hex.size(); i-- > 0; bit += 4) {
            const char c = hex[i];
            unsigned v;
            if (c >= '0' && c <= '9') v = static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f') v = static_cast<unsigned>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') v = static_cast<unsigned>(c - 'A' + 10);
            else throw std::invalid_argument("bad hex digit in mask");
            for (int b = 0; b < 4; ++b) {
                if (!((v >> b) & 1)) continue;
                if (bit + static_cast<std::size_t>(b) >= num_bits)
                    throw std::invalid_argument("hex mask wider than bit count");
                m.set(bit + static_cast<std::size_t>(b));
            }
        }
        return m;
    }

    std::size_t hash() const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull ^ num_bits_;
        for (std::uint64_t w : words_) {
            h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }

private:
    void check_index(std::size_t i) const {
        if (i >= num_bits_)
            throw std::out_of_range("BitMask index out of range");
    }

    std::size_t num_bits_ = 0;
    std::vector<std::uint64_t> words_;
};

struct BitMaskHash {
    std::size_t operator()(const BitMask& m) const { return m.hash(); }
};

} // namespace gari
