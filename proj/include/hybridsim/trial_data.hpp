#pragma once

#include "hybridsim/errors.hpp"
#include "hybridsim/numerics.hpp"
#include "hybridsim/random_stream.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

namespace hybridsim {

/// Study source.
enum class Source : std::uint8_t { Rct = 0, RealWorld = 1 };

/// Which of the two recorded outcomes an analysis targets.
enum class OutcomeKind : std::uint8_t { Primary, NegativeControl };

/// One participant. Outcomes are absent exactly when the matching censoring
/// indicator is set.
struct SubjectRecord {
    double w1 = 0.0;
    double w2 = 0.0;
    Source s = Source::Rct;
    int a = 0;
    int c = 0;
    std::optional<int> y_obs;
    int c_nco = 0;
    std::optional<int> nco_obs;

    bool is_rct() const { return s == Source::Rct; }
    bool censored(OutcomeKind kind) const
    {
        return (kind == OutcomeKind::Primary ? c : c_nco) != 0;
    }
    /// Observed outcome; only valid when !censored(kind).
    int outcome(OutcomeKind kind) const
    {
        return kind == OutcomeKind::Primary ? *y_obs : *nco_obs;
    }
    bool valid() const;
};

enum class DatasetLabel { Rct1, Rct2, Rwd, Pooled };

std::string_view to_string(DatasetLabel label);

class StudyDataset {
public:
    /// Validates the label/source invariants and every record.
    StudyDataset(std::vector<SubjectRecord> records, DatasetLabel label);

    /// Same as the checked constructor but allows an empty record list
    /// (complete-case subsets and fold splits may be empty).
    static StudyDataset unchecked(std::vector<SubjectRecord> records, DatasetLabel label);

    const std::vector<SubjectRecord>& records() const { return records_; }
    DatasetLabel label() const { return label_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const SubjectRecord& operator[](std::size_t i) const { return records_[i]; }

    auto begin() const { return records_.begin(); }
    auto end() const { return records_.end(); }

    std::size_t count_if(auto&& predicate) const
    {
        std::size_t n = 0;
        for (const auto& r : records_)
            n += predicate(r) ? 1 : 0;
        return n;
    }

    /// Subset of records whose index satisfies `keep`.
    StudyDataset subset(auto&& keep_index) const
    {
        std::vector<SubjectRecord> out;
        for (std::size_t i = 0; i < records_.size(); ++i)
            if (keep_index(i))
                out.push_back(records_[i]);
        return unchecked(std::move(out), label_);
    }

private:
    StudyDataset() = default;
    std::vector<SubjectRecord> records_;
    DatasetLabel label_ = DatasetLabel::Pooled;
};

enum class Estimand { RctUnadj, RctAdj, RctRwd, Hybrid, PsiPound, NcoAte };

std::string_view to_string(Estimand estimand);

struct EstimateWithCI {
    double psi = 0.0;
    double se = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    Estimand estimand = Estimand::RctUnadj;

    /// Checks lower <= psi <= upper and se >= 0.
    static EstimateWithCI make(double psi, double se, Interval ci, Estimand estimand);
    Interval interval() const { return {lower, upper}; }
};

/// Stratified V-fold partition of a dataset's record indices.
struct FoldAssignment {
    std::size_t n = 0;
    int V = 0;
    std::vector<int> fold_of;

    std::vector<std::size_t> fold_sizes() const;
};

/// Concatenate RCT and real-world controls (RCT first). Throws LabelMismatch
/// or EmptyInput.
StudyDataset pool(const StudyDataset& rct, const StudyDataset& rwd);

/// Random partition stratified by (s, a). Each nonempty stratum is shuffled
/// on its own sub-stream, so the RCT strata of a pooled dataset get the same
/// folds as the RCT alone. Throws StratumTooSmall.
FoldAssignment make_folds(const StudyDataset& dataset, int V, const RandomStream& stream);

/// Records of `assignment` in fold `v` (validation) or outside it (training).
StudyDataset fold_split(const StudyDataset& dataset, const FoldAssignment& assignment, int v,
                        bool validation);

StudyDataset complete_cases(const StudyDataset& dataset, OutcomeKind which);

/// Subject-level CSV: w1,w2,s,a,c,y,c_nco,nco with empty censored outcomes.
void write_csv(std::ostream& out, const StudyDataset& dataset);

}  // namespace hybridsim
