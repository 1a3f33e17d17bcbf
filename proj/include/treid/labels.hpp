#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace treid {

// Per-sample metadata shared by the fusion, training and evaluation
// commands. Row i of every array describes mode-3 slice i.
struct SampleLabels {
    std::vector<std::string> sample_ids;
    std::vector<std::string> person_ids;
    std::vector<std::string> camera_ids;

    std::size_t size() const { return sample_ids.size(); }

    // Distinct camera ids in first-occurrence order.
    std::vector<std::string> cameras() const;
    // Distinct person ids in first-occurrence order.
    std::vector<std::string> persons() const;

    SampleLabels select(const std::vector<std::size_t>& indices) const;
};

}  // namespace treid
