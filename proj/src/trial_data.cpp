#include "hybridsim/trial_data.hpp"

#include <algorithm>
#include <cstdio>

namespace hybridsim {

bool SubjectRecord::valid() const
{
    if (s == Source::RealWorld && a != 0)
        return false;
    if ((a != 0 && a != 1) || (c != 0 && c != 1) || (c_nco != 0 && c_nco != 1))
        return false;
    if (y_obs.has_value() == (c == 1) || nco_obs.has_value() == (c_nco == 1))
        return false;
    return true;
}

std::string_view to_string(DatasetLabel label)
{
    switch (label) {
    case DatasetLabel::Rct1: return "RCT1";
    case DatasetLabel::Rct2: return "RCT2";
    case DatasetLabel::Rwd: return "RWD";
    case DatasetLabel::Pooled: return "Pooled";
    }
    return "?";
}

std::string_view to_string(Estimand estimand)
{
    switch (estimand) {
    case Estimand::RctUnadj: return "RctUnadj";
    case Estimand::RctAdj: return "RctAdj";
    case Estimand::RctRwd: return "RctRwd";
    case Estimand::Hybrid: return "Hybrid";
    case Estimand::PsiPound: return "PsiPound";
    case Estimand::NcoAte: return "NcoAte";
    }
    return "?";
}

StudyDataset::StudyDataset(std::vector<SubjectRecord> records, DatasetLabel label)
    : records_(std::move(records)), label_(label)
{
    if (records_.empty())
        throw EmptyInput(std::string(to_string(label)) + " dataset has no records");
    for (const auto& r : records_) {
        if (!r.valid())
            throw InvalidParameter("subject record violates outcome/censoring invariants");
        if (label == DatasetLabel::Rwd && r.s != Source::RealWorld)
            throw LabelMismatch("RWD dataset contains an RCT record");
        if ((label == DatasetLabel::Rct1 || label == DatasetLabel::Rct2) && r.s != Source::Rct)
            throw LabelMismatch("RCT dataset contains a real-world record");
    }
}

StudyDataset StudyDataset::unchecked(std::vector<SubjectRecord> records, DatasetLabel label)
{
    StudyDataset d;
    d.records_ = std::move(records);
    d.label_ = label;
    return d;
}

EstimateWithCI EstimateWithCI::make(double psi, double se, Interval ci, Estimand estimand)
{
    if (!(se >= 0.0))
        throw InvalidParameter("standard error must be non-negative");
    if (!(ci.lower <= psi && psi <= ci.upper))
        throw InvalidParameter("interval does not contain the point estimate");
    return {psi, se, ci.lower, ci.upper, estimand};
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const
{
    std::vector<std::size_t> sizes(static_cast<std::size_t>(V), 0);
    for (int f : fold_of)
        ++sizes[static_cast<std::size_t>(f)];
    return sizes;
}

StudyDataset pool(const StudyDataset& rct, const StudyDataset& rwd)
{
    if (rct.empty() || rwd.empty())
        throw EmptyInput("pooling requires nonempty RCT and real-world datasets");
    for (const auto& r : rct)
        if (r.s != Source::Rct)
            throw LabelMismatch("pool: first argument must contain RCT records only");
    for (const auto& r : rwd)
        if (r.s != Source::RealWorld)
            throw LabelMismatch("pool: second argument must contain real-world records only");
    std::vector<SubjectRecord> all;
    all.reserve(rct.size() + rwd.size());
    all.insert(all.end(), rct.begin(), rct.end());
    all.insert(all.end(), rwd.begin(), rwd.end());
    return StudyDataset::unchecked(std::move(all), DatasetLabel::Pooled);
}

FoldAssignment make_folds(const StudyDataset& dataset, int V, const RandomStream& stream)
{
    if (V < 2)
        throw InvalidParameter("fold count must be at least 2");
    FoldAssignment out;
    out.n = dataset.size();
    out.V = V;
    out.fold_of.assign(dataset.size(), -1);

    std::size_t placed = 0;
    for (int s = 0; s <= 1; ++s) {
        for (int a = 0; a <= 1; ++a) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < dataset.size(); ++i)
                if (static_cast<int>(dataset[i].s) == s && dataset[i].a == a)
                    members.push_back(i);
            if (members.empty())
                continue;
            if (members.size() < static_cast<std::size_t>(V))
                throw StratumTooSmall("stratum (s=" + std::to_string(s) + ", a=" +
                                      std::to_string(a) + ") has fewer members than folds");
            Rng rng = stream.child("stratum").child(static_cast<std::uint64_t>(2 * s + a)).generator();
            shuffle(members, rng);
            // Rotating the starting fold keeps overall fold sizes balanced while
            // each stratum stays balanced to within one.
            const std::size_t start = placed % static_cast<std::size_t>(V);
            for (std::size_t k = 0; k < members.size(); ++k)
                out.fold_of[members[k]] = static_cast<int>((start + k) % static_cast<std::size_t>(V));
            placed += members.size();
        }
    }
    return out;
}

StudyDataset fold_split(const StudyDataset& dataset, const FoldAssignment& assignment, int v,
                        bool validation)
{
    if (assignment.n != dataset.size())
        throw InvalidParameter("fold assignment does not match dataset size");
    return dataset.subset([&](std::size_t i) { return (assignment.fold_of[i] == v) == validation; });
}

StudyDataset complete_cases(const StudyDataset& dataset, OutcomeKind which)
{
    return dataset.subset([&](std::size_t i) { return !dataset[i].censored(which); });
}

void write_csv(std::ostream& out, const StudyDataset& dataset)
{
    out << "w1,w2,s,a,c,y,c_nco,nco\n";
    char buf[64];
    for (const auto& r : dataset) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", r.w1, r.w2);
        out << buf << ',' << static_cast<int>(r.s) << ',' << r.a << ',' << r.c << ',';
        if (r.y_obs)
            out << *r.y_obs;
        out << ',' << r.c_nco << ',';
        if (r.nco_obs)
            out << *r.nco_obs;
        out << '\n';
    }
}

}  // namespace hybridsim
