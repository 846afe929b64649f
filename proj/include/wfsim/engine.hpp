//! Replicate orchestration: the only place parallelism is spawned.
#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace wfsim
{
//! Violated precondition on user-supplied parameters
struct ArgumentError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

//! A drift or kernel evaluated outside its contract during a run
struct ContractError : std::domain_error
{
    using std::domain_error::domain_error;
};

//! Iterative solver gave up; carries the last residual
struct ConvergenceError : std::runtime_error
{
    ConvergenceError(const std::string& what, double residual, long iterations)
        : std::runtime_error(what), residual(residual), iterations(iterations)
    {
    }
    double residual;
    long iterations;
};

//! A replicate job threw; the whole batch is aborted
struct ReplicateError : std::runtime_error
{
    ReplicateError(std::uint64_t index, const std::string& cause)
        : std::runtime_error("replicate " + std::to_string(index) + " failed: "
                             + cause)
        , index(index)
    {
    }
    std::uint64_t index;
};

void set_thread_count(int n);
int thread_count();

namespace detail
{
inline void rethrow_first(const std::vector<std::exception_ptr>& errors)
{
    for (std::size_t i = 0; i < errors.size(); ++i)
    {
        if (!errors[i])
            continue;
        try
        {
            std::rethrow_exception(errors[i]);
        }
        catch (const std::exception& e)
        {
            throw ReplicateError(i, e.what());
        }
        catch (...)
        {
            throw ReplicateError(i, "unknown exception");
        }
    }
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Run job(index, stream) for every replicate and gather outputs by index.
 *
 * Stream i is derive_stream(master_seed, i). The OpenMP version and the
 * serial reference produce identical vectors.
 */
template<class T, class Job>
std::vector<T>
map_replicates(std::size_t count, std::uint64_t master_seed, Job&& job)
{
    std::vector<T> out(count);
    std::vector<std::exception_ptr> errors(count);
    bool failed = false;
    long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 64) reduction(|| : failed)
    for (long i = 0; i < n; ++i)
    {
        try
        {
            auto stream = derive_stream(master_seed, static_cast<std::uint64_t>(i));
            out[i] = job(static_cast<std::uint64_t>(i), stream);
        }
        catch (...)
        {
            errors[i] = std::current_exception();
            failed = true;
        }
    }
    if (failed)
        detail::rethrow_first(errors);
    return out;
}

template<class T, class Job>
std::vector<T>
map_replicates_serial(std::size_t count, std::uint64_t master_seed, Job&& job)
{
    std::vector<T> out(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        try
        {
            auto stream = derive_stream(master_seed, i);
            out[i] = job(static_cast<std::uint64_t>(i), stream);
        }
        catch (const std::exception& e)
        {
            throw ReplicateError(i, e.what());
        }
    }
    return out;
}

//! Gather in parallel, then fold in ascending index order
template<class T, class Acc, class Job, class Reducer>
Acc parallel_replicates(std::size_t count,
                        std::uint64_t master_seed,
                        Job&& job,
                        Acc init,
                        Reducer&& reduce)
{
    auto outs = map_replicates<T>(count, master_seed, job);
    for (auto& o : outs)
        init = reduce(std::move(init), o);
    return init;
}

template<class T, class Acc, class Job, class Reducer>
Acc serial_replicates(std::size_t count,
                      std::uint64_t master_seed,
                      Job&& job,
                      Acc init,
                      Reducer&& reduce)
{
    auto outs = map_replicates_serial<T>(count, master_seed, job);
    for (auto& o : outs)
        init = reduce(std::move(init), o);
    return init;
}

//! Mean and standard error accumulated in index order
struct MeanAccumulator
{
    std::size_t n = 0;
    double mean = 0;
    double m2 = 0;

    void add(double x)
    {
        ++n;
        double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const
    {
        return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    }
    double stderr_mean() const;
};

}  // namespace wfsim
