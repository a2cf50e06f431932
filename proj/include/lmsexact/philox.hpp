#pragma once

#include <array>
#include <cstdint>

namespace lmsexact {

// Philox4x32-10 counter-based generator (Salmon et al. 2011 constants).
// Each (seed, stream) pair is an independent, splittable random stream, which
// is what makes per-trial reproducibility trivial: trial t always gets stream
// t regardless of scheduling.
class Philox4x32 {
public:
    Philox4x32(std::uint64_t seed, std::uint64_t stream)
        : key_{{(std::uint32_t)seed, (std::uint32_t)(seed >> 32)}},
          ctr_{{0, 0, (std::uint32_t)stream, (std::uint32_t)(stream >> 32)}} {}

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = (std::uint64_t)0xD2511F53u * ctr[0];
            const std::uint64_t p1 = (std::uint64_t)0xCD9E8D57u * ctr[2];
            ctr = {{(std::uint32_t)(p1 >> 32) ^ ctr[1] ^ key[0], (std::uint32_t)p1,
                    (std::uint32_t)(p0 >> 32) ^ ctr[3] ^ key[1], (std::uint32_t)p0}};
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            out_ = block(ctr_, key_);
            pos_ = 0;
            if (++ctr_[0] == 0) ++ctr_[1];   // 64-bit draw counter
        }
        return out_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        return lo | ((std::uint64_t)next_u32() << 32);
    }

    // strictly inside (0,1); safe for log() and inverse CDFs
    double uniform01() {
        return ((double)(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> out_{};
    int pos_ = 4;
};

} // namespace lmsexact
