#include "soaril/expert.hpp"

#include <string>

namespace soaril {

void validate_dataset(const ExpertDataset& data) {
    if (data.num_states < 1 || data.num_actions < 1) throw UsageError("expert dataset: dimensions must be positive");
    if (data.states.empty()) throw UsageError("expert dataset: no samples");
    const bool with_actions = data.mode == ImitationMode::state_action;
    if (with_actions && data.actions.size() != data.states.size())
        throw UsageError("expert dataset: state_action mode needs one action per sample");
    if (!with_actions && !data.actions.empty())
        throw UsageError("expert dataset: state_only mode carries no actions");
    for (std::size_t i = 0; i < data.states.size(); ++i) {
        if (data.states[i] < 0 || data.states[i] >= data.num_states)
            throw UsageError("expert dataset: state out of range at record " + std::to_string(i));
        if (with_actions && (data.actions[i] < 0 || data.actions[i] >= data.num_actions))
            throw UsageError("expert dataset: action out of range at record " + std::to_string(i));
    }
}

Vectord empirical_expert_occupancy(const ExpertDataset& data) {
    validate_dataset(data);
    Vectord d = Vectord::Zero(data.support_size());
    for (std::size_t i = 0; i < data.states.size(); ++i) {
        const std::int64_t idx = data.mode == ImitationMode::state_only
                                     ? data.states[i]
                                     : data.states[i] * data.num_actions + data.actions[i];
        d(idx) += 1.0;
    }
    return d / static_cast<double>(data.states.size());
}

}  // namespace soaril
