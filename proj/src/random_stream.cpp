#include "hybridsim/random_stream.hpp"

#include "hybridsim/errors.hpp"

#include <cmath>
#include <numbers>

namespace hybridsim {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// FNV-1a; labels are tagged so a label never collides with a small index.
std::uint64_t hash_label(std::string_view label)
{
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h ^ 0x8000000000000000ull;
}

std::uint64_t derive_key(std::uint64_t seed, const std::vector<std::uint64_t>& path)
{
    std::uint64_t h = splitmix64(seed);
    for (auto element : path)
        h = splitmix64(h ^ splitmix64(element + 0x632BE59BD9B4E019ull));
    return h;
}

}  // namespace

Philox4x32::Block Philox4x32::generate(Block ctr, Key key)
{
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

RandomStream::RandomStream(std::uint64_t master_seed)
    : master_seed_(master_seed), key_(derive_key(master_seed, {}))
{}

RandomStream RandomStream::child(std::string_view label) const
{
    RandomStream next = *this;
    next.path_.push_back(hash_label(label));
    next.key_ = derive_key(master_seed_, next.path_);
    return next;
}

RandomStream RandomStream::child(std::uint64_t index) const
{
    RandomStream next = *this;
    next.path_.push_back(index);
    next.key_ = derive_key(master_seed_, next.path_);
    return next;
}

RandomStream RandomStream::child(std::string_view label, std::uint64_t index) const
{
    return child(label).child(index);
}

Rng RandomStream::generator() const { return Rng(key_); }

Rng::Rng(std::uint64_t key)
    : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)}
{}

std::uint32_t Rng::next_u32()
{
    if (buffered_ == 0) {
        const Philox4x32::Block ctr{static_cast<std::uint32_t>(counter_),
                                    static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u};
        buffer_ = Philox4x32::generate(ctr, key_);
        ++counter_;
        buffered_ = 4;
    }
    return buffer_[static_cast<std::size_t>(4 - buffered_--)];
}

std::uint64_t Rng::next_u64()
{
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
}

double Rng::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double sd)
{
    if (has_spare_) {
        has_spare_ = false;
        return mean + sd * spare_normal_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    has_spare_ = true;
    return mean + sd * radius * std::cos(angle);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

int Rng::uniform_sign() { return (next_u32() & 1u) ? 1 : -1; }

std::uint64_t Rng::uniform_index(std::uint64_t bound)
{
    // Reject the tail of the 64-bit range that would bias the modulo.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

std::vector<double> draw(Rng& rng, const Distribution& dist, std::size_t n)
{
    std::vector<double> out;
    out.reserve(n);
    if (const auto* b = std::get_if<BernoulliDist>(&dist)) {
        if (!(b->p >= 0.0 && b->p <= 1.0))
            throw InvalidParameter("bernoulli p must lie in [0, 1]");
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(rng.bernoulli(b->p) ? 1.0 : 0.0);
    } else if (const auto* g = std::get_if<NormalDist>(&dist)) {
        if (!(g->sd >= 0.0) || !std::isfinite(g->mean))
            throw InvalidParameter("normal requires finite mean and sd >= 0");
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(rng.normal(g->mean, g->sd));
    } else {
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(static_cast<double>(rng.uniform_sign()));
    }
    return out;
}

}  // namespace hybridsim
