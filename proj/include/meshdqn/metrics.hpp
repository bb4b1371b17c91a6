#pragma once

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace meshdqn {

/// One JSON line per finished episode, written in server ingestion order.
struct EpisodeMetrics {
    long episode = 0;  // ingestion index, 0-based
    int worker = 0;
    int steps = 0;
    double cumulative_reward = 0.0;
    double final_error = 0.0;
    int vertices_removed = 0;
    double mean_loss = std::numeric_limits<double>::quiet_NaN();  // NaN before warmup
    long version = 0;  // weight snapshot the episode was played with

    bool operator==(const EpisodeMetrics& o) const {
        auto loss_eq = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
        return episode == o.episode && worker == o.worker && steps == o.steps &&
               cumulative_reward == o.cumulative_reward && final_error == o.final_error &&
               vertices_removed == o.vertices_removed && loss_eq(mean_loss, o.mean_loss) &&
               version == o.version;
    }
};

inline std::string to_json_line(const EpisodeMetrics& m) {
    nlohmann::json j;
    j["episode"] = m.episode;
    j["worker"] = m.worker;
    j["steps"] = m.steps;
    j["cumulative_reward"] = m.cumulative_reward;
    j["final_error"] = m.final_error;
    j["vertices_removed"] = m.vertices_removed;
    if (std::isnan(m.mean_loss))
        j["mean_loss"] = nullptr;
    else
        j["mean_loss"] = m.mean_loss;
    j["version"] = m.version;
    return j.dump();
}

inline EpisodeMetrics from_json_line(const std::string& line) {
    const nlohmann::json j = nlohmann::json::parse(line);
    EpisodeMetrics m;
    m.episode = j.at("episode").get<long>();
    m.worker = j.at("worker").get<int>();
    m.steps = j.at("steps").get<int>();
    m.cumulative_reward = j.at("cumulative_reward").get<double>();
    m.final_error = j.at("final_error").get<double>();
    m.vertices_removed = j.at("vertices_removed").get<int>();
    m.mean_loss = j.at("mean_loss").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                              : j.at("mean_loss").get<double>();
    m.version = j.at("version").get<long>();
    return m;
}

class MetricsWriter {
  public:
    explicit MetricsWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write metrics file " + path);
    }
    void write(const EpisodeMetrics& m) {
        out_ << to_json_line(m) << "\n";
        out_.flush();
    }

  private:
    std::ofstream out_;
};

inline std::vector<EpisodeMetrics> read_metrics(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read metrics file " + path);
    std::vector<EpisodeMetrics> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(from_json_line(line));
    }
    return out;
}

}  // namespace meshdqn
