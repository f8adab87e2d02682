#include "rlfep/harness.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

using namespace rlfep;

namespace {

std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double mean_rank = 0.5 * static_cast<double>(i + j);
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = mean_rank;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST(Spearman, KnownValues) {
    EXPECT_NEAR(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0, 1e-15);
    EXPECT_NEAR(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0, 1e-15);
    // d = (0, 0, 1, -1): rho = 1 - 6 * 2 / (4 * 15) = 0.8
    EXPECT_NEAR(spearman({1, 2, 3, 4}, {1, 2, 4, 3}), 0.8, 1e-15);
}

// Moving-average episode reward over the first 300 episodes trends upward.
TEST(Learning, MovingAverageRewardTrendsUpward) {
    const auto dir = std::filesystem::temp_directory_path() / "rlfep_test_learning";
    std::filesystem::remove_all(dir);
    WorkbenchConfig cfg = WorkbenchConfig::defaults();
    cfg.training.stop_avg_reward = 1e9;
    cfg.training.validate_every = 0;
    std::vector<double> episode, average;
    TrainOptions opt;
    opt.max_episodes = 300;
    opt.on_episode = [&](const EpisodeMetrics& m) {
        episode.push_back(m.episode);
        average.push_back(m.average_reward);
        return true;
    };
    train(cfg, dir, opt);
    ASSERT_EQ(average.size(), 300u);
    const double rho = spearman(episode, average);
    RecordProperty("spearman_rho", std::to_string(rho));
    EXPECT_GT(rho, 0.0);
}
