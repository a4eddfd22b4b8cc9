#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stagebound/bounds.hpp"
#include "stagebound/protocol.hpp"

namespace stagebound::corpus {

Protocol broadcast();
Protocol majority_ex1();
Protocol majority_ex1_untied();  // without the tie-breaking rule b a -> b b
Protocol majority_ex2();
Protocol flock_aadfp(int c);
Protocol flock_guidelines(int c);
Protocol log_flock(int k);  // threshold c = 2^k - 1
Protocol remainder(int m);
Protocol threshold(const std::vector<int>& a, int c);
Protocol average_and_conquer(int m, int d);

struct Entry {
    std::string name;    // "flock_aadfp_c5"
    std::string label;   // row label of the benchmark table
    std::function<Protocol()> build;
    int table_stages;    // published |S|
    Bound table_bound;
    std::optional<int> our_stages;  // when our tree size differs from the published one
};

// Benchmark rows, in table order.
const std::vector<Entry>& entries();
const Entry* find(const std::string& name);

}  // namespace stagebound::corpus
