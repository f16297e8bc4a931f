#include "hybridsim/trial_data.hpp"

#include "hybridsim/dgp.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace hybridsim;

TEST_SUITE("trial_data") {

TEST_CASE("record invariants")
{
    SubjectRecord r = fixture::subject(0, 0, Source::Rct, 1, 1);
    CHECK(r.valid());
    r.c = 1;
    CHECK_FALSE(r.valid());
    r.y_obs.reset();
    CHECK(r.valid());
    r.a = 2;
    CHECK_FALSE(r.valid());
}

TEST_CASE("dataset construction checks labels")
{
    CHECK_THROWS_AS(StudyDataset({}, DatasetLabel::Rct1), EmptyInput);
    std::vector<SubjectRecord> rwd{fixture::subject(0, 0, Source::RealWorld, 0, 0)};
    CHECK_THROWS_AS(StudyDataset(rwd, DatasetLabel::Rct1), LabelMismatch);
    std::vector<SubjectRecord> rct{fixture::subject(0, 0, Source::Rct, 0, 0)};
    CHECK_THROWS_AS(StudyDataset(rct, DatasetLabel::Rwd), LabelMismatch);
    CHECK_NOTHROW(StudyDataset(rwd, DatasetLabel::Rwd));
    CHECK(StudyDataset::unchecked({}, DatasetLabel::Pooled).empty());
}

TEST_CASE("pool keeps the rct first")
{
    const auto rct = fixture::balanced_rct20();
    const StudyDataset rwd({fixture::subject(1, 1, Source::RealWorld, 0, 1)}, DatasetLabel::Rwd);
    const auto pooled = pool(rct, rwd);
    CHECK(pooled.size() == 21);
    CHECK(pooled.label() == DatasetLabel::Pooled);
    CHECK(pooled[20].s == Source::RealWorld);
    CHECK_THROWS_AS(pool(rwd, rwd), LabelMismatch);
    CHECK_THROWS_AS(pool(rct, rct), LabelMismatch);
}

TEST_CASE("estimate with interval checks")
{
    CHECK_NOTHROW(EstimateWithCI::make(0.0, 0.1, {-0.2, 0.2}, Estimand::RctUnadj));
    CHECK_THROWS_AS(EstimateWithCI::make(0.3, 0.1, {-0.2, 0.2}, Estimand::RctUnadj), InvalidParameter);
    CHECK_THROWS_AS(EstimateWithCI::make(0.0, -0.1, {-0.2, 0.2}, Estimand::RctUnadj), InvalidParameter);
}

TEST_CASE("folds are stratified and balanced")
{
    const auto rct = generate_rct(3183, RandomStream(31));
    const auto rwd = generate_rwd(2483, 0.0, true, RandomStream(32));
    const auto data = pool(rct, rwd);
    const FoldAssignment folds = make_folds(data, 10, RandomStream(33));
    REQUIRE(folds.fold_of.size() == data.size());
    const auto sizes = folds.fold_sizes();
    for (auto s : sizes)
        CHECK((s == 566 || s == 567));

    // Every (s, a) stratum is spread within one record across folds.
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 2; ++a) {
            std::vector<int> per(10, 0);
            for (std::size_t i = 0; i < data.size(); ++i)
                if (static_cast<int>(data[i].s) == s && data[i].a == a)
                    ++per[static_cast<std::size_t>(folds.fold_of[i])];
            const auto [lo, hi] = std::minmax_element(per.begin(), per.end());
            CHECK(*hi - *lo <= 1);
        }
    }
}

TEST_CASE("rct folds do not depend on the real-world data")
{
    const auto rct = generate_rct(400, RandomStream(34));
    const auto rwd = generate_rwd(300, 0.5, true, RandomStream(35));
    const FoldAssignment alone = make_folds(rct, 5, RandomStream(36));
    const FoldAssignment pooled = make_folds(pool(rct, rwd), 5, RandomStream(36));
    for (std::size_t i = 0; i < rct.size(); ++i)
        REQUIRE(alone.fold_of[i] == pooled.fold_of[i]);
}

TEST_CASE("fold splits partition the data")
{
    const auto rct = generate_rct(200, RandomStream(37));
    const FoldAssignment folds = make_folds(rct, 4, RandomStream(38));
    std::size_t total = 0;
    for (int v = 0; v < 4; ++v) {
        const auto val = fold_split(rct, folds, v, true);
        const auto train = fold_split(rct, folds, v, false);
        CHECK(val.size() + train.size() == rct.size());
        total += val.size();
    }
    CHECK(total == rct.size());
}

TEST_CASE("fold errors")
{
    const auto rct = fixture::balanced_rct20();
    CHECK_THROWS_AS(make_folds(rct, 1, RandomStream(1)), InvalidParameter);
    CHECK_THROWS_AS(make_folds(rct, 11, RandomStream(1)), StratumTooSmall);
    CHECK_NOTHROW(make_folds(rct, 10, RandomStream(1)));
}

TEST_CASE("complete cases and csv")
{
    std::vector<SubjectRecord> recs{fixture::subject(0.5, -1, Source::Rct, 1, 1),
                                    fixture::subject(0.25, 2, Source::Rct, 0, 0, true)};
    const StudyDataset d(recs, DatasetLabel::Rct1);
    CHECK(complete_cases(d, OutcomeKind::Primary).size() == 1);
    std::ostringstream os;
    write_csv(os, d);
    CHECK(os.str() == "w1,w2,s,a,c,y,c_nco,nco\n0.5,-1,0,1,0,1,0,0\n0.25,2,0,0,1,,0,0\n");
}

}
