#include "treid/labels.hpp"

#include <algorithm>

namespace treid {

namespace {

std::vector<std::string> distinct(const std::vector<std::string>& values) {
    std::vector<std::string> out;
    for (const auto& v : values)
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
}

}  // namespace

std::vector<std::string> SampleLabels::cameras() const { return distinct(camera_ids); }

std::vector<std::string> SampleLabels::persons() const { return distinct(person_ids); }

SampleLabels SampleLabels::select(const std::vector<std::size_t>& indices) const {
    SampleLabels out;
    out.sample_ids.reserve(indices.size());
    out.person_ids.reserve(indices.size());
    out.camera_ids.reserve(indices.size());
    for (std::size_t i : indices) {
        out.sample_ids.push_back(sample_ids[i]);
        out.person_ids.push_back(person_ids[i]);
        out.camera_ids.push_back(camera_ids[i]);
    }
    return out;
}

}  // namespace treid
