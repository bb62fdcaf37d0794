// Emits deterministic randomly sampled joint-distribution JSON files for
// experiments and regression corpora.

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "leakbound/json_io.hpp"
#include "leakbound/sampling.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Sample full-rank joint distributions and write them as JSON"};
    std::uint64_t seed = 12345;
    int x_size = 2;
    int y_size = 3;
    int count = 10;
    double min_cell = 0.01;
    std::string out_dir = ".";
    std::string prefix = "instance";
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--x", x_size, "alphabet size of the secret")
        ->check(CLI::PositiveNumber);
    app.add_option("--y", y_size, "alphabet size of the observation")
        ->check(CLI::PositiveNumber);
    app.add_option("--count", count, "number of instances")
        ->check(CLI::PositiveNumber);
    app.add_option("--min-cell", min_cell, "minimum joint cell mass");
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--prefix", prefix, "output file name prefix");
    CLI11_PARSE(app, argc, argv);

    try {
        std::filesystem::create_directories(out_dir);
        leakbound::Rng rng(seed);
        std::vector<std::string> labels_x, labels_y;
        for (int i = 0; i < x_size; ++i) labels_x.push_back("x" + std::to_string(i));
        for (int i = 0; i < y_size; ++i) labels_y.push_back("y" + std::to_string(i));
        for (int k = 0; k < count; ++k) {
            leakbound::JointDistribution joint =
                leakbound::sample_joint(rng, x_size, y_size, min_cell);
            std::string path = out_dir + "/" + prefix + "_" +
                               std::to_string(k) + ".json";
            leakbound::write_text_file(
                path, leakbound::joint_to_json(joint, labels_x, labels_y));
            std::cout << path << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
