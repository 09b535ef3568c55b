#include "suzuki/random.hpp"

#include <stdexcept>

namespace sz {

PrGenerator::PrGenerator(std::vector<Mat4> X, std::uint64_t seed)
    : X_(std::move(X)), rng_(seed) {
    if (X_.empty()) throw std::invalid_argument("PrGenerator: empty generating set");
    for (const Mat4& g : X_)
        if (det(g).is_zero()) throw std::invalid_argument("PrGenerator: singular generator");
    std::size_t n = std::max<std::size_t>(10, 2 * X_.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i % X_.size();
        slots_.push_back({X_[j], egen(static_cast<int>(j))});
    }
    acc_ = {identity(*X_[0].a[0][0].F), epow(egen(0), 0)};
    std::size_t scramble = 50 + 10 * X_.size();
    for (std::size_t i = 0; i < scramble; ++i) move_once();
}

void PrGenerator::move_once() {
    std::size_t n = slots_.size();
    std::size_t i = pick(n);
    std::size_t j = pick(n - 1);
    if (j >= i) ++j;
    Mat4 s = slots_[j].first;
    ExprPtr se = slots_[j].second;
    if (pick(2)) {
        s = inverse(s);
        se = einv(se);
    }
    if (pick(2)) {
        slots_[i] = {slots_[i].first * s, emul(slots_[i].second, se)};
    } else {
        slots_[i] = {s * slots_[i].first, emul(se, slots_[i].second)};
    }
    if (pick(2)) {
        acc_ = {acc_.first * slots_[i].first, emul(acc_.second, slots_[i].second)};
    } else {
        acc_ = {slots_[i].first * acc_.first, emul(slots_[i].second, acc_.second)};
    }
}

std::pair<Mat4, ExprPtr> PrGenerator::next() {
    move_once();
    return acc_;
}

}  // namespace sz
