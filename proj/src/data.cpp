#include "rieszreg/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rieszreg/rng.hpp"

namespace rieszreg {

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

constexpr double kPropensityClamp = 1e-4;

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, const std::string& path) {
    try {
        size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw DataError(path + ": cannot parse numeric cell '" + cell + "'");
    }
}

}  // namespace

void Dataset::validate() const {
    if (x.rows() == 0 || x.cols() == 0) throw DataError("dataset is empty");
    if (y.size() != x.rows()) throw DataError("outcome length does not match row count");
    if (!x.allFinite() || !y.allFinite()) throw DataError("dataset contains non-finite values");
    if (has_target()) {
        if (target.cols() != x.cols())
            throw DataError("target sample dimension does not match the source regressors");
        if (!target.allFinite()) throw DataError("target sample contains non-finite values");
    }
    if (layout == Layout::TreatmentFirst) {
        for (int i = 0; i < n(); ++i) {
            const double d = x(i, 0);
            if (d != 0.0 && d != 1.0)
                throw DataError("TreatmentFirst layout requires a binary first column (row " +
                                std::to_string(i) + " has " + std::to_string(d) + ")");
        }
    }
}

SyntheticDraw gen_synthetic_ate(std::uint64_t seed, int n) {
    if (n < 10) throw ValidationError("gen_synthetic_ate: n must be at least 10");
    const int dz = 3;
    const double sd_coef = std::sqrt(0.5);

    // Coefficients fixed per seed: propensity index (a, b, c) and outcome (at, bt).
    SplitMix64 coef_rng(seed, "ate-coef");
    Eigen::VectorXd a(dz), b(dz), c(dz), at(dz), bt(dz);
    for (int j = 0; j < dz; ++j) a(j) = sd_coef * coef_rng.next_normal();
    for (int j = 0; j < dz; ++j) b(j) = sd_coef * coef_rng.next_normal();
    for (int j = 0; j < dz; ++j) c(j) = sd_coef * coef_rng.next_normal();
    for (int j = 0; j < dz; ++j) at(j) = sd_coef * coef_rng.next_normal();
    for (int j = 0; j < dz; ++j) bt(j) = sd_coef * coef_rng.next_normal();

    const auto propensity_index = [a, b, c](const Eigen::VectorXd& z) {
        double h = 0.0;
        for (int j = 0; j < 3; ++j) h += a(j) * z(j) + b(j) * z(j) * z(j);
        h += c(0) * z(0) * z(1) + c(1) * z(1) * z(2) + c(2) * z(0) * z(2);
        return h;
    };
    const auto propensity = [propensity_index](const Eigen::VectorXd& z) {
        return std::clamp(sigmoid(propensity_index(z)), kPropensityClamp, 1.0 - kPropensityClamp);
    };
    const double tau = 5.0;
    const auto baseline = [at, bt](const Eigen::VectorXd& z) {
        const double lin = z.dot(at);
        double quad = 0.0;
        for (int j = 0; j < 3; ++j) quad += z(j) * z(j) * bt(j);
        return 1.0 + lin * lin + sigmoid(quad);
    };

    SplitMix64 z_rng(seed, "ate-z");
    SplitMix64 d_rng(seed, "ate-d");
    SplitMix64 eps_rng(seed, "ate-eps");

    Dataset data;
    data.layout = Layout::TreatmentFirst;
    data.x.resize(n, 1 + dz);
    data.y.resize(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd z(dz);
        for (int j = 0; j < dz; ++j) z(j) = z_rng.next_normal();
        const double e = propensity(z);
        const double d = d_rng.next_uniform() < e ? 1.0 : 0.0;
        data.x(i, 0) = d;
        data.x.row(i).tail(dz) = z;
        data.y(i) = baseline(z) + tau * d + eps_rng.next_normal();
    }

    OracleNuisance oracle;
    oracle.theta = tau;
    oracle.propensity = [propensity](const Eigen::VectorXd& z) { return propensity(z); };
    oracle.regression = [baseline, tau](const Eigen::VectorXd& x) {
        return baseline(x.tail(x.size() - 1)) + tau * x(0);
    };
    oracle.representer = [propensity](const Eigen::VectorXd& x) {
        const double e = propensity(x.tail(x.size() - 1));
        return x(0) / e - (1.0 - x(0)) / (1.0 - e);
    };
    return {std::move(data), std::move(oracle)};
}

SyntheticDraw gen_covariate_shift(std::uint64_t seed, int n_source, int n_target,
                                  int dim, double shift) {
    if (n_source < 10 || n_target < 10)
        throw ValidationError("gen_covariate_shift: sample sizes must be at least 10");
    if (dim < 1) throw ValidationError("gen_covariate_shift: dim must be positive");

    SplitMix64 src_rng(seed, "cs-source");
    SplitMix64 tgt_rng(seed, "cs-target");
    SplitMix64 eps_rng(seed, "cs-eps");

    const auto gamma0 = [](const Eigen::VectorXd& x) {
        return 1.0 + x.sum() + 0.5 * x.squaredNorm();
    };

    Dataset data;
    data.layout = Layout::Generic;
    data.x.resize(n_source, dim);
    data.y.resize(n_source);
    for (int i = 0; i < n_source; ++i) {
        for (int j = 0; j < dim; ++j) data.x(i, j) = src_rng.next_normal();
        data.y(i) = gamma0(data.x.row(i)) + eps_rng.next_normal();
    }
    data.target.resize(n_target, dim);
    for (int i = 0; i < n_target; ++i)
        for (int j = 0; j < dim; ++j) data.target(i, j) = shift + tgt_rng.next_normal();

    OracleNuisance oracle;
    // E over the target of gamma_0: 1 + d*shift + (d/2)(1 + shift^2).
    oracle.theta = 1.0 + dim * shift + 0.5 * dim * (1.0 + shift * shift);
    oracle.regression = gamma0;
    // Ratio of two unit-variance Gaussians with means shift*1 and 0.
    oracle.representer = [dim, shift](const Eigen::VectorXd& x) {
        return std::exp(shift * x.sum() - 0.5 * dim * shift * shift);
    };
    return {std::move(data), std::move(oracle)};
}

FoldSplit split_folds(int n, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("split_folds: k must be at least 2");
    if (k > n) throw ValidationError("split_folds: k exceeds the sample size");
    SplitMix64 rng(seed, "folds");
    const std::vector<int> perm = rng.permutation(n);

    FoldSplit out;
    out.eval.resize(k);
    out.train.resize(k);
    const int base = n / k;
    const int extra = n % k;
    int pos = 0;
    for (int f = 0; f < k; ++f) {
        const int size = base + (f < extra ? 1 : 0);
        out.eval[f].assign(perm.begin() + pos, perm.begin() + pos + size);
        pos += size;
    }
    for (int f = 0; f < k; ++f) {
        std::vector<bool> in_eval(n, false);
        for (int i : out.eval[f]) in_eval[i] = true;
        out.train[f].reserve(n - static_cast<int>(out.eval[f].size()));
        for (int i = 0; i < n; ++i)
            if (!in_eval[i]) out.train[f].push_back(i);
    }
    return out;
}

Dataset subset_rows(const Dataset& data, const std::vector<int>& rows) {
    if (rows.empty()) throw ValidationError("subset_rows: empty selection");
    Dataset out;
    out.layout = data.layout;
    out.target = data.target;
    out.x.resize(static_cast<int>(rows.size()), data.dim());
    out.y.resize(static_cast<int>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int i = rows[r];
        if (i < 0 || i >= data.n()) throw ValidationError("subset_rows: index out of range");
        out.x.row(static_cast<int>(r)) = data.x.row(i);
        out.y(static_cast<int>(r)) = data.y(i);
    }
    return out;
}

namespace {

Eigen::MatrixXd read_numeric_rows(std::ifstream& in, const std::string& path, int cols) {
    std::vector<double> values;
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (static_cast<int>(cells.size()) != cols)
            throw DataError(path + ": row " + std::to_string(rows + 2) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(cols));
        for (const auto& cell : cells) values.push_back(parse_cell(cell, path));
        ++rows;
    }
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = values[i * cols + j];
    return m;
}

}  // namespace

Dataset load_csv(const std::string& path, Layout layout) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw DataError(path + ": empty file");
    const auto cells = split_line(header);
    if (cells.size() < 2) throw DataError(path + ": header must list y and at least one regressor");
    if (cells[0] != "y") throw DataError(path + ": first header column must be 'y'");
    if (layout == Layout::TreatmentFirst && cells[1] != "d")
        throw DataError(path + ": TreatmentFirst layout expects header y,d,z1,...");

    const int cols = static_cast<int>(cells.size());
    const Eigen::MatrixXd m = read_numeric_rows(in, path, cols);
    if (m.rows() == 0) throw DataError(path + ": no data rows");

    Dataset data;
    data.layout = layout;
    data.y = m.col(0);
    data.x = m.rightCols(cols - 1);
    data.validate();
    return data;
}

void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.precision(17);
    out << "y";
    if (data.layout == Layout::TreatmentFirst) {
        out << ",d";
        for (int j = 1; j < data.dim(); ++j) out << ",z" << j;
    } else {
        for (int j = 1; j <= data.dim(); ++j) out << ",x" << j;
    }
    out << "\n";
    for (int i = 0; i < data.n(); ++i) {
        out << data.y(i);
        for (int j = 0; j < data.dim(); ++j) out << "," << data.x(i, j);
        out << "\n";
    }
}

Eigen::MatrixXd load_target_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw DataError(path + ": empty file");
    const auto cells = split_line(header);
    if (cells.empty() || cells[0] != "x1")
        throw DataError(path + ": target file expects header x1,...,xK");
    const Eigen::MatrixXd m = read_numeric_rows(in, path, static_cast<int>(cells.size()));
    if (m.rows() == 0) throw DataError(path + ": no data rows");
    return m;
}

}  // namespace rieszreg
