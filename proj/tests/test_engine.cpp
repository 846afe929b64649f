#include "doctest.h"

#include <cmath>
#include <set>
#include <stdexcept>

#include "wfsim/engine.hpp"
#include "wfsim/rng.hpp"
#include "wfsim/stats.hpp"

using namespace wfsim;

TEST_CASE("philox known-answer vectors")
{
    using W = std::array<std::uint32_t, 4>;
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff})
          == W{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0})
          == W{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are deterministic and addressable")
{
    auto a = derive_stream(42, 0), b = derive_stream(42, 0);
    for (int i = 0; i < 1000; ++i)
        REQUIRE(a() == b());

    auto s = derive_stream(42, 0);
    double first = s.uniform();
    CHECK(first > 0.0);
    CHECK(first <= 1.0);

    auto r = derive_stream(7, 3);
    std::vector<double> seq;
    for (int i = 0; i < 10; ++i)
        seq.push_back(r.uniform());
    for (std::uint64_t blk = 0; blk < 5; ++blk)
    {
        auto u = r.block_uniforms(blk);
        CHECK(u[0] == seq[2 * blk]);
        CHECK(u[1] == seq[2 * blk + 1]);
    }
    CHECK(r.words_drawn() == 10);
}

TEST_CASE("unit conversion never returns zero")
{
    CHECK(ReplicateStream::to_unit(0) == 0x1.0p-53);
    CHECK(ReplicateStream::to_unit(~0ULL) == 1.0);
}

TEST_CASE("distinct replicate indices look independent")
{
    auto a = derive_stream(42, 0), b = derive_stream(42, 1);
    std::vector<double> xa, xb;
    for (int i = 0; i < 10000; ++i)
    {
        xa.push_back(a.uniform());
        xb.push_back(b.uniform());
    }
    CHECK(ks_two_sample(xa, xb).p_value > 0.01);
    CHECK(xa != xb);

    auto c = derive_stream(42, 0).split(1);
    std::vector<double> xc;
    for (int i = 0; i < 10000; ++i)
        xc.push_back(c.uniform());
    CHECK(ks_two_sample(xa, xc).p_value > 0.01);
}

TEST_CASE("replicate reduction is independent of thread count")
{
    auto job = [](std::uint64_t i, ReplicateStream& s) { return static_cast<double>(i) + s.uniform(); };
    auto sum = [](double acc, double x) { return acc + x; };
    double ref = serial_replicates<double>(5000, 9, job, 0.0, sum);
    for (int threads : {1, 2, 4, 8})
    {
        set_thread_count(threads);
        CHECK(parallel_replicates<double>(5000, 9, job, 0.0, sum) == ref);
    }
    set_thread_count(1);

    auto idx = [](std::uint64_t i, ReplicateStream&) { return static_cast<long>(i); };
    auto add = [](long acc, long x) { return acc + x; };
    CHECK(parallel_replicates<long>(4, 0, idx, 0L, add) == 6);
    CHECK(parallel_replicates<long>(0, 0, idx, 0L, add) == 0);
}

TEST_CASE("mean of one uniform per replicate obeys the CLT bound")
{
    MeanAccumulator acc = parallel_replicates<double>(
        100000,
        1,
        [](std::uint64_t, ReplicateStream& s) { return s.uniform(); },
        MeanAccumulator{},
        [](MeanAccumulator a, double x) {
            a.add(x);
            return a;
        });
    CHECK(std::abs(acc.mean - 0.5) <= 3 * (1 / std::sqrt(12.0)) / std::sqrt(1e5));
}

TEST_CASE("a failing replicate aborts the batch with its index")
{
    auto job = [](std::uint64_t i, ReplicateStream&) -> int {
        if (i == 17 || i == 40)
            throw std::runtime_error("boom");
        return 0;
    };
    try
    {
        map_replicates<int>(100, 0, job);
        FAIL("expected ReplicateError");
    }
    catch (const ReplicateError& e)
    {
        CHECK(e.index == 17);
    }
    CHECK_THROWS_AS(map_replicates_serial<int>(100, 0, job), ReplicateError);
}

TEST_CASE("mean accumulator matches two-pass formulas")
{
    std::vector<double> x{0.1, 0.4, 0.35, 0.9, 0.2};
    MeanAccumulator acc;
    for (double v : x)
        acc.add(v);
    CHECK(acc.mean == doctest::Approx(mean(x)).epsilon(1e-14));
    CHECK(acc.variance() == doctest::Approx(variance(x)).epsilon(1e-13));
}
