#include "hybridsim/random_stream.hpp"

#include "hybridsim/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace hybridsim;

TEST_SUITE("random_stream") {

TEST_CASE("philox known-answer vectors")
{
    // Reference outputs of Philox4x32-10 from the Random123 distribution.
    const auto zero = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
    CHECK(zero == Philox4x32::Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});

    const auto ones = Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                           {0xffffffff, 0xffffffff});
    CHECK(ones == Philox4x32::Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});

    const auto pi = Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                         {0xa4093822, 0x299f31d0});
    CHECK(pi == Philox4x32::Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same path gives the same sequence")
{
    const RandomStream a = RandomStream(42).child("dgp", 3).child("rct1");
    const RandomStream b = RandomStream(42).child("dgp", 3).child("rct1");
    CHECK(a == b);
    Rng ra = a.generator(), rb = b.generator();
    for (int i = 0; i < 1000; ++i)
        REQUIRE(ra.next_u64() == rb.next_u64());
}

TEST_CASE("child streams are distinct")
{
    const RandomStream root(7);
    std::set<std::uint64_t> keys;
    keys.insert(root.key());
    keys.insert(root.child("a").key());
    keys.insert(root.child("b").key());
    keys.insert(root.child(0).key());
    keys.insert(root.child(1).key());
    keys.insert(root.child("a").child("b").key());
    keys.insert(root.child("b").child("a").key());
    keys.insert(RandomStream(8).child("a").key());
    CHECK(keys.size() == 8);
}

TEST_CASE("labels and indices do not collide")
{
    // A labelled index is the label followed by the index.
    const RandomStream root(1);
    CHECK(root.child("iter", 5) == root.child("iter").child(5));
    CHECK(root.child("iter", 5).key() != root.child(5).child("iter").key());
}

TEST_CASE("uniform moments")
{
    Rng rng = RandomStream(11).generator();
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        s += u;
        s2 += u * u;
    }
    CHECK(s / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("normal moments")
{
    Rng rng = RandomStream(12).generator();
    const int n = 200000;
    double s = 0.0, s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal(1.0, 2.0);
        s += z;
        s2 += (z - 1.0) * (z - 1.0);
        s4 += std::pow((z - 1.0) / 2.0, 4);
    }
    CHECK(std::abs(s / n - 1.0) < 0.02);
    CHECK(s2 / n == doctest::Approx(4.0).epsilon(0.02));
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("bernoulli and sign frequencies")
{
    Rng rng = RandomStream(13).generator();
    const int n = 100000;
    int hits = 0, plus = 0;
    for (int i = 0; i < n; ++i) {
        hits += rng.bernoulli(0.042) ? 1 : 0;
        plus += rng.uniform_sign() > 0 ? 1 : 0;
    }
    CHECK(std::abs(hits / double(n) - 0.042) < 0.003);
    CHECK(std::abs(plus / double(n) - 0.5) < 0.01);
    CHECK_FALSE(rng.bernoulli(0.0));
    CHECK(rng.bernoulli(1.0));
}

TEST_CASE("uniform_index covers its range evenly")
{
    Rng rng = RandomStream(14).generator();
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i)
        ++counts[rng.uniform_index(7)];
    for (int c : counts)
        CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("draw validates parameters")
{
    Rng rng = RandomStream(15).generator();
    CHECK_THROWS_AS(draw(rng, BernoulliDist{1.5}, 3), InvalidParameter);
    CHECK_THROWS_AS(draw(rng, BernoulliDist{-0.1}, 3), InvalidParameter);
    CHECK_THROWS_AS(draw(rng, NormalDist{0.0, -1.0}, 3), InvalidParameter);
    const auto signs = draw(rng, UniformSignDist{}, 50);
    CHECK(std::all_of(signs.begin(), signs.end(), [](double s) { return s == 1.0 || s == -1.0; }));
    CHECK(draw(rng, NormalDist{0.0, 1.0}, 0).empty());
}

TEST_CASE("shuffle is a permutation and depends on the stream")
{
    std::vector<int> a(100), b;
    std::iota(a.begin(), a.end(), 0);
    b = a;
    Rng r1 = RandomStream(16).generator(), r2 = RandomStream(17).generator();
    shuffle(a, r1);
    shuffle(b, r2);
    CHECK(a != b);
    std::sort(a.begin(), a.end());
    for (int i = 0; i < 100; ++i)
        CHECK(a[static_cast<std::size_t>(i)] == i);
}

}
