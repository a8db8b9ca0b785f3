// Acceptance suite runner: one pass/fail line per criterion.
//   qhdlab_acceptance            run everything
//   qhdlab_acceptance 3 7 12     run selected criteria

#include <cstdlib>
#include <iostream>
#include <vector>

#include "qhdlab/acceptance.hpp"

int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    bool all = true;
    try {
        for (auto& r : qhdlab::acceptance::run_criteria(ids)) {
            std::cout << qhdlab::acceptance::format_result(r) << std::endl;
            all = all && r.pass;
        }
    } catch (const std::exception& e) {
        std::cerr << "acceptance suite error: " << e.what() << std::endl;
        return 1;
    }
    return all ? 0 : 1;
}
