#pragma once

// Experiment config parsing for the CLI. Two formats share one schema: JSON
// (canonical machine form) and a flat "a.b.c = value" text form that stays
// diff-friendly in experiment logs. The text form parses each value as JSON,
// so numbers, strings, booleans and arrays all work.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "paccert/certify.hpp"
#include "paccert/errors.hpp"

namespace paccert_cli {

using nlohmann::json;

inline json parse_config_text(const std::string& text) {
    // first non-space character decides the format
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '{') return json::parse(text);
        break;
    }
    json root = json::object();
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw paccert::ConfigError("config line " + std::to_string(line_no) +
                                       ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::exception&) {
            parsed = value;  // bare words are strings
        }
        json* node = &root;
        std::size_t start = 0;
        for (;;) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot - start);
            if (part.empty())
                throw paccert::ConfigError("config line " + std::to_string(line_no) +
                                           ": empty key component");
            if (dot == std::string::npos) {
                (*node)[part] = parsed;
                break;
            }
            node = &(*node)[part];
            start = dot + 1;
        }
    }
    return root;
}

template <typename T>
T require_field(const json& j, const std::string& path, const std::string& field) {
    if (!j.contains(field))
        throw paccert::ConfigError("config: missing field " + path + "." + field);
    try {
        return j.at(field).get<T>();
    } catch (const json::exception& e) {
        throw paccert::ConfigError("config: bad value for " + path + "." + field + ": " + e.what());
    }
}

template <typename T>
T field_or(const json& j, const std::string& field, T fallback) {
    if (!j.contains(field)) return fallback;
    return j.at(field).get<T>();
}

inline paccert::certify::Experiment experiment_from_json(const json& cfg) {
    using paccert::ConfigError;
    namespace certify = paccert::certify;
    namespace optim = paccert::optim;
    namespace nets = paccert::nets;
    certify::Experiment exp;

    const json ds = cfg.value("dataset", json::object());
    const std::string source = field_or<std::string>(ds, "source", "blobs");
    if (source == "blobs") {
        exp.source = certify::Experiment::Source::Blobs;
        exp.n = require_field<long>(ds, "dataset", "n");
        exp.input_dim = field_or<int>(ds, "input_dim", 2);
        exp.num_classes = field_or<int>(ds, "num_classes", 2);
        exp.separation = field_or<double>(ds, "separation", 4.0);
    } else if (source == "idx") {
        exp.source = certify::Experiment::Source::Idx;
        exp.idx_images = require_field<std::string>(ds, "dataset", "images");
        exp.idx_labels = require_field<std::string>(ds, "dataset", "labels");
        exp.subset = field_or<long>(ds, "subset", 0);
        exp.n = field_or<long>(ds, "n", 0);  // informative only; actual n comes from the file
    } else {
        throw ConfigError("config: dataset.source must be blobs or idx");
    }
    exp.data_seed = field_or<std::uint64_t>(ds, "seed", 1);
    exp.corrupt_portion = field_or<double>(ds, "corrupt_portion", 0.0);
    exp.corrupt_seed = field_or<std::uint64_t>(ds, "corrupt_seed", 7);

    const json split = cfg.value("split", json::object());
    exp.m = require_field<long>(split, "split", "m");
    exp.split_seed = field_or<std::uint64_t>(split, "seed", 2);

    const json model = cfg.value("model", json::object());
    const std::string kind = field_or<std::string>(model, "kind", "linear");
    if (kind == "linear") {
        exp.arch.kind = nets::ModelArch::Kind::LinearSoftmax;
    } else if (kind == "mlp") {
        exp.arch.kind = nets::ModelArch::Kind::Mlp;
        exp.arch.hidden = field_or<std::vector<int>>(model, "hidden", {32});
    } else {
        throw ConfigError("config: model.kind must be linear or mlp");
    }
    exp.arch.input_dim = exp.input_dim;
    exp.arch.num_classes = exp.num_classes;
    if (model.contains("input_dim")) exp.arch.input_dim = model.at("input_dim").get<int>();
    if (model.contains("num_classes")) exp.arch.num_classes = model.at("num_classes").get<int>();
    exp.init_seed = field_or<std::uint64_t>(model, "init_seed", 3);

    const json opt = cfg.value("optimizer", json::object());
    exp.run.algo = optim::algorithm_from_name(require_field<std::string>(opt, "optimizer", "algorithm"));
    const long T = require_field<long>(opt, "optimizer", "T");
    exp.run.schedule.T = T;
    const double gamma0 = field_or<double>(opt, "gamma", 0.1);
    const double gdecay = field_or<double>(opt, "gamma_decay", 1.0);
    const long ginterval = field_or<long>(opt, "gamma_interval", 1);
    exp.run.schedule.gamma = optim::Schedule::geometric(T, gamma0, gdecay, std::max(1L, ginterval));
    if (opt.contains("eps"))
        exp.run.schedule.eps = optim::Schedule::constant(T, opt.at("eps").get<double>());
    if (opt.contains("sigma"))
        exp.run.schedule.sigma = optim::Schedule::constant(T, opt.at("sigma").get<double>());
    exp.run.schedule.alpha = field_or<double>(opt, "alpha", 0.0);
    exp.run.schedule.beta = field_or<double>(opt, "beta", 0.0);
    exp.run.schedule.lambda_reg = field_or<double>(opt, "lambda_reg", 0.0);
    exp.run.cld_dt = field_or<double>(opt, "dt", 0.0);
    exp.run.cld_c_bound = field_or<double>(opt, "c_bound", 0.0);
    exp.run.opt_seed = field_or<std::uint64_t>(opt, "seed", 4);
    exp.run.risk_cadence = field_or<long>(opt, "risk_cadence", 0);
    if (opt.contains("batch")) {
        const json b = opt.at("batch");
        exp.run.batch.size = require_field<long>(b, "optimizer.batch", "size");
        const std::string mode = field_or<std::string>(b, "mode", "without-replacement");
        if (mode == "without-replacement")
            exp.run.batch.mode = paccert::data::BatchMode::WithoutReplacement;
        else if (mode == "with-replacement")
            exp.run.batch.mode = paccert::data::BatchMode::WithReplacement;
        else if (mode == "stratified")
            exp.run.batch.mode = paccert::data::BatchMode::StratifiedIJ;
        else
            throw ConfigError("config: optimizer.batch.mode unknown: " + mode);
        exp.run.batch.from_complement = field_or<long>(b, "from_complement", 0);
        exp.run.batch.from_prior = field_or<long>(b, "from_prior", 0);
    }

    const json cert = cfg.value("certificate", json::object());
    exp.theorem =
        paccert::bounds::theorem_from_name(field_or<std::string>(cert, "theorem", "fgd"));
    exp.eta = field_or<double>(cert, "eta", 1.0);
    exp.delta = field_or<double>(cert, "delta", 0.1);

    const json test = cfg.value("test", json::object());
    exp.test_n = field_or<long>(test, "n", 0);
    exp.test_seed = field_or<std::uint64_t>(test, "seed", 99);
    return exp;
}

inline paccert::certify::Experiment load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw paccert::ConfigError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    try {
        return experiment_from_json(parse_config_text(text));
    } catch (const json::exception& e) {
        throw paccert::ConfigError(std::string("config: ") + e.what());
    }
}

}  // namespace paccert_cli
