//! Counter-based random streams addressed by (master seed, replicate index).
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace wfsim
{
//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 keyed by a hash of (master seed, substream) with the
 * replicate index in the upper half of the counter.
 *
 * Each block yields two 53-bit uniforms. The stream satisfies the standard
 * UniformRandomBitGenerator concept so it can drive <random> distributions.
 * Uniforms lie in (0, 1]: a draw of exactly zero would otherwise let the
 * boundary states 0 and 1 leave under a degenerate branch weight.
 */
class ReplicateStream
{
  public:
    using result_type = std::uint64_t;

    ReplicateStream(std::uint64_t master_seed,
                    std::uint64_t replicate_index,
                    std::uint64_t substream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max()
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()()
    {
        if (pos_ == 2)
        {
            buf_ = block_bits(block_++);
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    double uniform() { return to_unit((*this)()); }

    //! Random access: the two uniforms of block b, independent of position
    std::array<double, 2> block_uniforms(std::uint64_t b) const
    {
        auto bits = block_bits(b);
        return {to_unit(bits[0]), to_unit(bits[1])};
    }

    //! Independent stream sharing seed and replicate index
    ReplicateStream split(std::uint64_t substream) const
    {
        return ReplicateStream(seed_, index_, substream);
    }

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t replicate_index() const { return index_; }
    std::uint64_t substream() const { return sub_; }
    //! Number of 64-bit words consumed so far
    std::uint64_t words_drawn() const { return 2 * block_ - (2 - pos_); }

    static double to_unit(std::uint64_t bits)
    {
        return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
    }

  private:
    inline std::array<std::uint64_t, 2> block_bits(std::uint64_t b) const;

    std::uint64_t seed_;
    std::uint64_t index_;
    std::uint64_t sub_;
    std::array<std::uint32_t, 2> key_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int pos_ = 2;
};

ReplicateStream derive_stream(std::uint64_t master_seed,
                              std::uint64_t replicate_index);

//---------------------------------------------------------------------------//
// Inline definitions
//---------------------------------------------------------------------------//

inline std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline ReplicateStream::ReplicateStream(std::uint64_t master_seed,
                                        std::uint64_t replicate_index,
                                        std::uint64_t substream)
    : seed_(master_seed), index_(replicate_index), sub_(substream)
{
    std::uint64_t k = splitmix64(splitmix64(master_seed) ^ splitmix64(~substream));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

inline std::array<std::uint32_t, 4>
philox4x32_10(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k)
{
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r)
    {
        if (r > 0)
        {
            k[0] += w0;
            k[1] += w1;
        }
        std::uint64_t p0 = static_cast<std::uint64_t>(m0) * c[0];
        std::uint64_t p1 = static_cast<std::uint64_t>(m1) * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
             static_cast<std::uint32_t>(p0)};
    }
    return c;
}

inline std::array<std::uint64_t, 2>
ReplicateStream::block_bits(std::uint64_t b) const
{
    auto c = philox4x32_10({static_cast<std::uint32_t>(b),
                            static_cast<std::uint32_t>(b >> 32),
                            static_cast<std::uint32_t>(index_),
                            static_cast<std::uint32_t>(index_ >> 32)},
                           key_);
    return {(static_cast<std::uint64_t>(c[1]) << 32) | c[0],
            (static_cast<std::uint64_t>(c[3]) << 32) | c[2]};
}

inline ReplicateStream derive_stream(std::uint64_t master_seed,
                                     std::uint64_t replicate_index)
{
    return ReplicateStream(master_seed, replicate_index);
}

}  // namespace wfsim
