#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace hybridsim {

/// Philox4x32-10 counter-based block generator.
///
/// Output block i is a pure function of (key, i), so any sub-stream can be
/// reproduced independently of how many other streams were consumed first.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block counter, Key key);
};

class Rng;

/// Immutable address of a random sub-stream: a master seed plus an ordered
/// path of labels and indices, e.g. (seed, "dgp", 0, "iter", 17, "rct1").
class RandomStream {
public:
    explicit RandomStream(std::uint64_t master_seed = 0);

    RandomStream child(std::string_view label) const;
    RandomStream child(std::uint64_t index) const;
    RandomStream child(std::string_view label, std::uint64_t index) const;

    std::uint64_t master_seed() const { return master_seed_; }
    const std::vector<std::uint64_t>& path() const { return path_; }

    /// 64-bit Philox key derived from (master_seed, path).
    std::uint64_t key() const { return key_; }

    /// Fresh generator positioned at the start of this stream.
    Rng generator() const;

    friend bool operator==(const RandomStream&, const RandomStream&) = default;

private:
    std::uint64_t master_seed_;
    std::vector<std::uint64_t> path_;
    std::uint64_t key_;
};

/// Sequential generator over one stream. Not thread-safe; derive one per
/// task from a RandomStream.
class Rng {
public:
    explicit Rng(std::uint64_t key);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    /// Box-Muller; pairs are cached so draws are consumed two at a time.
    double normal(double mean = 0.0, double sd = 1.0);
    bool bernoulli(double p);
    /// +1 or -1 with equal probability.
    int uniform_sign();
    /// Uniform integer on [0, bound) by rejection (bound > 0).
    std::uint64_t uniform_index(std::uint64_t bound);

private:
    Philox4x32::Key key_;
    std::uint64_t counter_ = 0;
    Philox4x32::Block buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

struct BernoulliDist {
    double p;
};
struct NormalDist {
    double mean;
    double sd;
};
struct UniformSignDist {};
using Distribution = std::variant<BernoulliDist, NormalDist, UniformSignDist>;

/// n draws from `dist`; throws InvalidParameter on p outside [0,1] or sd < 0.
std::vector<double> draw(Rng& rng, const Distribution& dist, std::size_t n);

/// In-place Fisher-Yates shuffle driven by `rng`.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng)
{
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_index(i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace hybridsim
