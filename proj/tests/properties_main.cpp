#include <iostream>

#include "property_suite.hpp"

int main()
{
    auto r = wfsim::properties::run_all(std::cout);
    std::cout << r.checks - r.failures << "/" << r.checks << " properties hold\n";
    return r.failures == 0 ? 0 : 1;
}
