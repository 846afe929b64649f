//! Structural property checks shared by the standalone suite and the acceptance run.
#pragma once

#include <ostream>

namespace wfsim::properties
{
struct SuiteResult
{
    int checks = 0;
    int failures = 0;
};

//! Prints one PASS/FAIL line per property
SuiteResult run_all(std::ostream& os);
}  // namespace wfsim::properties
