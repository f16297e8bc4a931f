#pragma once

#include "hybridsim/trial_data.hpp"

#include <vector>

namespace fixture {

inline hybridsim::SubjectRecord subject(double w1, double w2, hybridsim::Source s, int a, int y, bool censored = false)
{
    hybridsim::SubjectRecord r;
    r.w1 = w1;
    r.w2 = w2;
    r.s = s;
    r.a = a;
    r.c = censored ? 1 : 0;
    if (!censored)
        r.y_obs = y;
    r.nco_obs = 0;
    return r;
}

/// Balanced RCT, 10 per arm: 4/10 treated events and 2/10 control events.
inline hybridsim::StudyDataset balanced_rct20()
{
    std::vector<hybridsim::SubjectRecord> recs;
    for (int i = 0; i < 10; ++i) {
        const double w = 0.1 * i - 0.45;
        recs.push_back(subject(w, -w, hybridsim::Source::Rct, 1, i < 4 ? 1 : 0));
        recs.push_back(subject(-w, w * 0.5, hybridsim::Source::Rct, 0, i < 2 ? 1 : 0));
    }
    return hybridsim::StudyDataset(std::move(recs), hybridsim::DatasetLabel::Rct1);
}

}  // namespace fixture
