#include "c3sim/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "c3sim/errors.hpp"

namespace c3sim {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<MeasuredSample> parse_measured_csv(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line) ||
        trim(line) != "scenario_id,collective,strategy,measured_speedup")
        throw ValidationError(
            "measured csv: expected header scenario_id,collective,strategy,measured_speedup");
    std::vector<MeasuredSample> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto row = trim(line);
        if (row.empty()) continue;
        std::istringstream cells(row);
        std::string id, coll, strat, speed, extra;
        if (!std::getline(cells, id, ',') || !std::getline(cells, coll, ',') ||
            !std::getline(cells, strat, ',') || !std::getline(cells, speed, ','))
            throw ValidationError("measured csv: malformed row at line " + std::to_string(lineno));
        if (std::getline(cells, extra, ','))
            throw ValidationError("measured csv: too many cells at line " + std::to_string(lineno));
        MeasuredSample s;
        s.scenario_id = trim(id);
        s.collective = collective_kind_from_string(trim(coll));
        s.strategy = strategy_from_string(trim(strat));
        try {
            s.measured_speedup = std::stod(trim(speed));
        } catch (const std::exception&) {
            throw ValidationError("measured csv: bad speedup at line " + std::to_string(lineno));
        }
        if (!(s.measured_speedup > 0))
            throw ValidationError("measured csv: speedup must be > 0 at line " +
                                  std::to_string(lineno));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<MeasuredSample> load_measured_csv(const std::filesystem::path& path) {
    return parse_measured_csv(read_file(path));
}

namespace {

constexpr int kNumParams = kNumKernelClasses * 2;

CoRunPenalty penalties_from_vector(const std::vector<double>& theta) {
    CoRunPenalty p;
    for (int c = 0; c < kNumKernelClasses; ++c)
        for (int b = 0; b < 2; ++b) p.factor[c][b] = theta[c * 2 + b];
    return p;
}

std::vector<double> vector_from_penalties(const CoRunPenalty& p) {
    std::vector<double> theta(kNumParams);
    for (int c = 0; c < kNumKernelClasses; ++c)
        for (int b = 0; b < 2; ++b) theta[c * 2 + b] = p.factor[c][b];
    return theta;
}

}  // namespace

FitResult fit_penalties(const std::vector<C3Scenario>& scenarios,
                        const std::vector<MeasuredSample>& samples,
                        const MachineDescriptor& md, const SlowdownTableSet& tables,
                        const EfficiencyParams& params, const CoRunPenalty& initial) {
    if (samples.size() < 3)
        throw FitError("calibration needs at least 3 measured samples, got " +
                       std::to_string(samples.size()));
    std::set<Strategy> strategies;
    for (const auto& s : samples) strategies.insert(s.strategy);
    strategies.erase(Strategy::Serial);
    if (strategies.size() < 2)
        throw FitError("calibration needs samples from at least 2 concurrent strategies");

    std::map<std::pair<std::string, CollectiveKind>, const C3Scenario*> index;
    for (const auto& s : scenarios) index[{s.id, s.collective.kind}] = &s;
    for (const auto& s : samples)
        if (!index.count({s.scenario_id, s.collective}))
            throw UnknownEntityError("measured csv references unknown scenario '" +
                                     s.scenario_id + "' (" + to_string(s.collective) + ")");

    const auto feasible = [](const std::vector<double>& theta) {
        for (int c = 0; c < kNumKernelClasses; ++c)
            if (theta[c * 2] < 1.0 || theta[c * 2 + 1] < 1.0 ||
                theta[c * 2 + 1] > theta[c * 2])
                return false;
        return true;
    };
    const auto residuals = [&](const std::vector<double>& theta, std::vector<double>& r) {
        const CoRunPenalty p = penalties_from_vector(theta);
        // Reject invalid interior points by inflating the residual instead of
        // throwing; keeps the search inside the feasible region.
        if (!feasible(theta)) {
            std::fill(r.begin(), r.end(), 1e6);
            return;
        }
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            const C3Scenario& sc = *index.at({s.scenario_id, s.collective});
            const SimTimeline tl = simulate(sc, s.strategy, md, tables, p, params);
            r[i] = tl.speedup - s.measured_speedup;
        }
    };

    // Levenberg-Marquardt with forward-difference Jacobian.
    std::vector<double> theta = vector_from_penalties(initial);
    const std::size_t m = samples.size();
    std::vector<double> r(m), r_try(m);
    residuals(theta, r);
    double sse = 0;
    for (double v : r) sse += v * v;

    double lambda = 1e-3;
    int iter = 0;
    const int max_iter = 200;
    for (; iter < max_iter; ++iter) {
        // Jacobian; fall back to a backward difference when the forward step
        // leaves the feasible region (a parameter on the DMA == CU boundary).
        std::vector<std::vector<double>> J(m, std::vector<double>(kNumParams));
        const double h = 1e-6;
        for (int j = 0; j < kNumParams; ++j) {
            auto theta_h = theta;
            double step = h;
            theta_h[j] = theta[j] + h;
            if (!feasible(theta_h)) {
                theta_h[j] = theta[j] - h;
                step = -h;
            }
            if (!feasible(theta_h)) {
                for (std::size_t i = 0; i < m; ++i) J[i][j] = 0.0;  // pinned
                continue;
            }
            residuals(theta_h, r_try);
            for (std::size_t i = 0; i < m; ++i) J[i][j] = (r_try[i] - r[i]) / step;
        }
        // Normal equations (JtJ + lambda*diag) dx = -Jt r.
        std::vector<std::vector<double>> A(kNumParams, std::vector<double>(kNumParams, 0.0));
        std::vector<double> g(kNumParams, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (int a = 0; a < kNumParams; ++a) {
                g[a] += J[i][a] * r[i];
                for (int b = 0; b <= a; ++b) A[a][b] += J[i][a] * J[i][b];
            }
        for (int a = 0; a < kNumParams; ++a)
            for (int b = a + 1; b < kNumParams; ++b) A[a][b] = A[b][a];

        bool improved = false;
        for (int attempt = 0; attempt < 8 && !improved; ++attempt) {
            auto M = A;
            for (int a = 0; a < kNumParams; ++a) M[a][a] += lambda * (A[a][a] + 1e-12);
            // Solve M dx = -g by Gaussian elimination with partial pivoting.
            std::vector<double> b(kNumParams);
            for (int a = 0; a < kNumParams; ++a) b[a] = -g[a];
            std::vector<int> piv(kNumParams);
            bool singular = false;
            for (int col = 0; col < kNumParams && !singular; ++col) {
                int p = col;
                for (int row = col + 1; row < kNumParams; ++row)
                    if (std::abs(M[row][col]) > std::abs(M[p][col])) p = row;
                if (std::abs(M[p][col]) < 1e-300) {
                    singular = true;
                    break;
                }
                std::swap(M[p], M[col]);
                std::swap(b[p], b[col]);
                for (int row = col + 1; row < kNumParams; ++row) {
                    const double f = M[row][col] / M[col][col];
                    for (int k = col; k < kNumParams; ++k) M[row][k] -= f * M[col][k];
                    b[row] -= f * b[col];
                }
            }
            std::vector<double> dx(kNumParams, 0.0);
            if (!singular) {
                for (int row = kNumParams - 1; row >= 0; --row) {
                    double acc = b[row];
                    for (int k = row + 1; k < kNumParams; ++k) acc -= M[row][k] * dx[k];
                    dx[row] = acc / M[row][row];
                }
            }
            auto theta_try = theta;
            for (int a = 0; a < kNumParams; ++a)
                theta_try[a] = std::max(1.0, theta_try[a] + dx[a]);
            residuals(theta_try, r_try);
            double sse_try = 0;
            for (double v : r_try) sse_try += v * v;
            if (!singular && sse_try < sse) {
                theta = theta_try;
                r = r_try;
                sse = sse_try;
                lambda = std::max(lambda * 0.3, 1e-12);
                improved = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!improved || sse < 1e-24) break;
    }

    FitResult out;
    out.penalties = penalties_from_vector(theta);
    validate(out.penalties);
    out.rms_residual = std::sqrt(sse / static_cast<double>(m));
    out.iterations = iter + 1;
    return out;
}

}  // namespace c3sim
