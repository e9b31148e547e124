#include "ulight/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ulight/errors.hpp"

namespace ulight::io {

namespace {

using nlohmann::json;

json mixture_to_json(const GaussianMixture& m) {
    json out;
    out["log_weights"] = std::vector<double>(m.log_weights.begin(), m.log_weights.end());
    auto rows = [&](const Eigen::MatrixXd& mat) {
        std::vector<std::vector<double>> r;
        for (Eigen::Index k = 0; k < mat.rows(); ++k) {
            r.emplace_back(mat.row(k).begin(), mat.row(k).end());
        }
        return r;
    };
    out["means"] = rows(m.means);
    out["log_diag_covs"] = rows(m.log_diag_covs);
    return out;
}

GaussianMixture mixture_from_json(const json& j, int dim, const std::string& path) {
    const auto lw = j.at("log_weights").get<std::vector<double>>();
    const auto means = j.at("means").get<std::vector<std::vector<double>>>();
    const auto covs = j.at("log_diag_covs").get<std::vector<std::vector<double>>>();
    const auto c = lw.size();
    if (c == 0 || means.size() != c || covs.size() != c) {
        throw IoError("checkpoint " + path + ": inconsistent mixture shapes");
    }
    GaussianMixture m;
    m.dim = dim;
    m.log_weights = Eigen::Map<const Eigen::VectorXd>(lw.data(), lw.size());
    m.means.resize(c, dim);
    m.log_diag_covs.resize(c, dim);
    for (std::size_t k = 0; k < c; ++k) {
        if (means[k].size() != static_cast<std::size_t>(dim) ||
            covs[k].size() != static_cast<std::size_t>(dim)) {
            throw IoError("checkpoint " + path + ": mixture row length does not match dim");
        }
        for (int i = 0; i < dim; ++i) {
            m.means(k, i) = means[k][i];
            m.log_diag_covs(k, i) = covs[k][i];
        }
    }
    return m;
}

json divergence_to_json(const DivergenceSpec& d) {
    return json{{"kind", to_string(d.kind)}, {"tau", d.tau}};
}

DivergenceSpec divergence_from_json(const json& j) {
    DivergenceSpec d;
    d.kind = divergence_kind_from_string(j.at("kind").get<std::string>());
    d.tau = j.at("tau").get<double>();
    return d;
}

} // namespace

Eigen::MatrixXd read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file " + path);
    int cols = 1;
    for (char ch : line) {
        if (ch == ',') ++cols;
    }

    std::vector<double> values;
    long rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        int got = 0;
        while (std::getline(ss, field, ',')) {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(field, &pos);
            } catch (const std::exception&) {
                throw IoError(path + ": unparseable value '" + field + "'");
            }
            if (!std::isfinite(v)) throw IoError(path + ": non-finite value in row " +
                                                 std::to_string(rows + 2));
            values.push_back(v);
            ++got;
        }
        if (got != cols) {
            throw IoError(path + ": row " + std::to_string(rows + 2) + " has " +
                          std::to_string(got) + " fields, header has " + std::to_string(cols));
        }
        ++rows;
    }
    if (rows == 0) throw IoError(path + ": no data rows");

    Eigen::MatrixXd out(rows, cols);
    for (long r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) out(r, c) = values[r * cols + c];
    }
    return out;
}

void write_csv(const std::string& path, const Eigen::MatrixXd& data,
               const std::vector<std::string>& columns) {
    if (static_cast<Eigen::Index>(columns.size()) != data.cols()) {
        throw IoError("write_csv: column name count does not match data");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out << (c ? "," : "") << columns[c];
    }
    out << "\n";
    char buf[40];
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", data(r, c));
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("failed while writing " + path);
}

std::vector<std::string> indexed_columns(const std::string& prefix, int count) {
    std::vector<std::string> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
    const PlanModel& plan = checkpoint.plan;
    json j;
    j["schema_version"] = 1;
    j["dim"] = plan.v.dim;
    j["epsilon"] = plan.epsilon;
    j["div1"] = divergence_to_json(plan.div1);
    j["div2"] = divergence_to_json(plan.div2);
    j["v"] = mixture_to_json(plan.v);
    j["u"] = mixture_to_json(plan.u);
    j["seed"] = checkpoint.seed;
    j["steps_trained"] = checkpoint.steps_trained;

    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed while writing " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("checkpoint " + path + ": " + e.what());
    }

    try {
        if (j.at("schema_version").get<int>() != 1) {
            throw IoError("checkpoint " + path + ": unsupported schema_version");
        }
        const int dim = j.at("dim").get<int>();
        Checkpoint out;
        out.plan.epsilon = j.at("epsilon").get<double>();
        out.plan.div1 = divergence_from_json(j.at("div1"));
        out.plan.div2 = divergence_from_json(j.at("div2"));
        out.plan.v = mixture_from_json(j.at("v"), dim, path);
        out.plan.u = mixture_from_json(j.at("u"), dim, path);
        out.seed = j.at("seed").get<std::uint64_t>();
        out.steps_trained = j.at("steps_trained").get<long>();
        if (out.plan.epsilon <= 0.0) throw IoError("checkpoint " + path + ": epsilon <= 0");
        return out;
    } catch (const json::exception& e) {
        throw IoError("checkpoint " + path + ": " + e.what());
    }
}

} // namespace ulight::io
