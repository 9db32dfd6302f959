#include "hro/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace hro {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_distribution(const Eigen::Ref<const RowVector>& row, const std::string& what)
{
    require((row.array() >= 0.0).all(), what + " has negative entries");
    require(std::abs(row.sum() - 1.0) <= kStochasticTol, what + " does not sum to 1");
}

int draw_categorical(const Eigen::Ref<const RowVector>& probs, std::mt19937_64& engine)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(engine);
    double acc = 0.0;
    const int last = static_cast<int>(probs.size()) - 1;
    for (int k = 0; k < last; ++k) {
        acc += probs(k);
        if (u < acc) {
            return k;
        }
    }
    // Round-off can leave u >= acc; fall back to the last state with mass.
    for (int k = last; k > 0; --k) {
        if (probs(k) > 0.0) {
            return k;
        }
    }
    return 0;
}

void check_observations(const HmmSpec& spec, const StateSequence& observations)
{
    require(!observations.empty(), "observation sequence is empty");
    for (const int o : observations) {
        require(o >= 0 && o < spec.n_observed(), "observation symbol out of range");
    }
}

RowVector random_row(int n, std::mt19937_64& engine)
{
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    RowVector row(n);
    for (int k = 0; k < n; ++k) {
        row(k) = (1.0 + jitter(engine)) / n;
    }
    return row / row.sum();
}

struct ScaledPass {
    Matrix alpha;   // filtered, row-normalized
    Vector scale;   // per-step normalizers c_t
    bool impossible = false;
};

ScaledPass scaled_forward(const HmmSpec& spec, const Matrix& likelihoods)
{
    const Eigen::Index T = likelihoods.rows();
    const Eigen::Index K = spec.n_hidden();
    ScaledPass pass;
    pass.alpha.resize(T, K);
    pass.scale.resize(T);
    RowVector a = spec.initial.transpose().cwiseProduct(likelihoods.row(0));
    for (Eigen::Index t = 0; t < T; ++t) {
        if (t > 0) {
            a = (pass.alpha.row(t - 1) * spec.transition).cwiseProduct(likelihoods.row(t));
        }
        const double c = a.sum();
        if (!(c > 0.0)) {
            pass.impossible = true;
            return pass;
        }
        pass.scale(t) = c;
        pass.alpha.row(t) = a / c;
    }
    return pass;
}

Matrix scaled_backward(const HmmSpec& spec, const Matrix& likelihoods, const Vector& scale)
{
    const Eigen::Index T = likelihoods.rows();
    Matrix beta(T, spec.n_hidden());
    beta.row(T - 1).setOnes();
    for (Eigen::Index t = T - 2; t >= 0; --t) {
        const RowVector next = likelihoods.row(t + 1).cwiseProduct(beta.row(t + 1));
        beta.row(t) = (spec.transition * next.transpose()).transpose() / scale(t + 1);
    }
    return beta;
}

void validate_likelihoods(const HmmSpec& spec, const Matrix& likelihoods)
{
    require(likelihoods.rows() > 0, "observation sequence is empty");
    require(likelihoods.cols() == spec.n_hidden(), "likelihood matrix has wrong state count");
    require((likelihoods.array() >= 0.0).all() && likelihoods.allFinite(),
            "likelihoods must be finite and non-negative");
}

} // namespace

void HmmSpec::validate() const
{
    require(initial.size() > 0, "HMM needs at least one hidden state");
    require(emission.cols() > 0, "HMM needs at least one observed symbol");
    require(transition.rows() == initial.size() && transition.cols() == initial.size(),
            "transition matrix must be n_hidden x n_hidden");
    require(emission.rows() == initial.size(), "emission matrix must have n_hidden rows");
    check_distribution(initial.transpose(), "initial distribution");
    for (Eigen::Index i = 0; i < transition.rows(); ++i) {
        check_distribution(transition.row(i), "transition row " + std::to_string(i));
        check_distribution(emission.row(i), "emission row " + std::to_string(i));
    }
}

HmmSpec HmmSpec::uniform(int n_hidden, int n_observed)
{
    require(n_hidden > 0 && n_observed > 0, "HMM dimensions must be positive");
    HmmSpec spec;
    spec.initial = Vector::Constant(n_hidden, 1.0 / n_hidden);
    spec.transition = Matrix::Constant(n_hidden, n_hidden, 1.0 / n_hidden);
    spec.emission = Matrix::Constant(n_hidden, n_observed, 1.0 / n_observed);
    return spec;
}

GaussianEmissionSpec::GaussianEmissionSpec(Vector mean_, Vector variance_)
    : mean(std::move(mean_)), variance(std::move(variance_))
{
    require(mean.size() == variance.size(), "mean and variance sizes differ");
    variance = variance.cwiseMax(variance_floor);
}

Matrix GaussianEmissionSpec::likelihoods(const Vector& values) const
{
    Matrix out(values.size(), mean.size());
    for (Eigen::Index k = 0; k < mean.size(); ++k) {
        const double var = std::max(variance(k), variance_floor);
        const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
        out.col(k) = ((values.array() - mean(k)).square() / (-2.0 * var)).exp() * norm;
    }
    return out;
}

StateSequence sample_state_path(const HmmSpec& spec, int length, std::uint64_t seed)
{
    spec.validate();
    require(length >= 1, "path length must be at least 1");
    auto engine = make_engine(seed, Stream::StatePath);
    StateSequence path(static_cast<std::size_t>(length));
    path[0] = draw_categorical(spec.initial.transpose(), engine);
    for (std::size_t t = 1; t < path.size(); ++t) {
        path[t] = draw_categorical(spec.transition.row(path[t - 1]), engine);
    }
    return path;
}

StateSequence emit_labels(const HmmSpec& spec, const StateSequence& hidden_path, std::uint64_t seed)
{
    spec.validate();
    auto engine = make_engine(seed, Stream::Labels);
    StateSequence labels;
    labels.reserve(hidden_path.size());
    for (const int h : hidden_path) {
        require(h >= 0 && h < spec.n_hidden(), "hidden state index out of range");
        labels.push_back(draw_categorical(spec.emission.row(h), engine));
    }
    return labels;
}

Matrix emission_likelihoods(const HmmSpec& spec, const StateSequence& observations)
{
    check_observations(spec, observations);
    Matrix out(static_cast<Eigen::Index>(observations.size()), spec.n_hidden());
    for (std::size_t t = 0; t < observations.size(); ++t) {
        out.row(static_cast<Eigen::Index>(t)) = spec.emission.col(observations[t]).transpose();
    }
    return out;
}

StatePosterior forward(const HmmSpec& spec, const Matrix& likelihoods)
{
    validate_likelihoods(spec, likelihoods);
    const ScaledPass pass = scaled_forward(spec, likelihoods);
    StatePosterior out;
    if (pass.impossible) {
        out.log_likelihood = kNegInf;
        return out;
    }
    out.filtered = pass.alpha;
    out.log_likelihood = pass.scale.array().log().sum();
    return out;
}

StatePosterior forward(const HmmSpec& spec, const StateSequence& observations)
{
    spec.validate();
    return forward(spec, emission_likelihoods(spec, observations));
}

StatePosterior backward_smooth(const HmmSpec& spec, const Matrix& likelihoods)
{
    validate_likelihoods(spec, likelihoods);
    const ScaledPass pass = scaled_forward(spec, likelihoods);
    StatePosterior out;
    if (pass.impossible) {
        out.log_likelihood = kNegInf;
        return out;
    }
    const Matrix beta = scaled_backward(spec, likelihoods, pass.scale);
    out.filtered = pass.alpha;
    out.smoothed = pass.alpha.cwiseProduct(beta);
    for (Eigen::Index t = 0; t < out.smoothed.rows(); ++t) {
        out.smoothed.row(t) /= out.smoothed.row(t).sum();
    }
    out.log_likelihood = pass.scale.array().log().sum();
    return out;
}

StatePosterior backward_smooth(const HmmSpec& spec, const StateSequence& observations)
{
    spec.validate();
    return backward_smooth(spec, emission_likelihoods(spec, observations));
}

StateSequence viterbi(const HmmSpec& spec, const StateSequence& observations)
{
    spec.validate();
    check_observations(spec, observations);
    const int K = spec.n_hidden();
    const auto T = static_cast<Eigen::Index>(observations.size());
    const Matrix log_a = spec.transition.array().log().matrix();
    const Matrix log_b = spec.emission.array().log().matrix();

    // psi(t, k): best log-probability of observations t+1.. given state k at t.
    // Decoding then walks forward and takes the lowest index among (near-)ties,
    // which yields the lexicographically smallest most probable path.
    Matrix psi = Matrix::Zero(T, K);
    for (Eigen::Index t = T - 2; t >= 0; --t) {
        const auto next = static_cast<std::size_t>(t + 1);
        for (int i = 0; i < K; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < K; ++j) {
                best = std::max(best, log_a(i, j) + log_b(j, observations[next]) + psi(t + 1, j));
            }
            psi(t, i) = best;
        }
    }

    auto pick = [&](const Vector& score) {
        const double top = score.maxCoeff();
        const double slack = 1e-12 * std::max(1.0, std::abs(top));
        for (int k = 0; k < K; ++k) {
            if (score(k) >= top - slack) {
                return k;
            }
        }
        return 0;
    };

    StateSequence path(static_cast<std::size_t>(T));
    Vector score(K);
    for (int k = 0; k < K; ++k) {
        score(k) = std::log(spec.initial(k)) + log_b(k, observations[0]) + psi(0, k);
    }
    path[0] = pick(score);
    for (Eigen::Index t = 1; t < T; ++t) {
        const int prev = path[static_cast<std::size_t>(t - 1)];
        for (int k = 0; k < K; ++k) {
            score(k) = log_a(prev, k) + log_b(k, observations[static_cast<std::size_t>(t)]) + psi(t, k);
        }
        path[static_cast<std::size_t>(t)] = pick(score);
    }
    return path;
}

Vector predict_next_state_probs(const HmmSpec& spec, const Vector& filtered_last)
{
    require(filtered_last.size() == spec.n_hidden(), "filtered vector has wrong length");
    require((filtered_last.array() >= 0.0).all() && std::abs(filtered_last.sum() - 1.0) <= 1e-10,
            "filtered vector is not a probability distribution");
    return (filtered_last.transpose() * spec.transition).transpose();
}

BaumWelchResult baum_welch_from(const StateSequence& observations, HmmSpec start, int max_iter,
                                double tol)
{
    start.validate();
    check_observations(start, observations);
    const int K = start.n_hidden();
    const int S = start.n_observed();
    const auto T = static_cast<Eigen::Index>(observations.size());

    BaumWelchResult result;
    result.spec = std::move(start);
    HmmSpec& spec = result.spec;
    double previous = kNegInf;
    for (int iter = 0; iter < max_iter; ++iter) {
        const Matrix lik = emission_likelihoods(spec, observations);
        const ScaledPass pass = scaled_forward(spec, lik);
        if (pass.impossible) {
            result.log_likelihood = kNegInf;
            result.trace.push_back(kNegInf);
            return result;
        }
        const double ll = pass.scale.array().log().sum();
        result.trace.push_back(ll);
        if (iter > 0 && ll - previous < tol) {
            result.converged = true;
            result.log_likelihood = ll;
            return result;
        }
        previous = ll;

        const Matrix beta = scaled_backward(spec, lik, pass.scale);
        Matrix gamma = pass.alpha.cwiseProduct(beta);
        for (Eigen::Index t = 0; t < T; ++t) {
            gamma.row(t) /= gamma.row(t).sum();
        }
        Matrix xi_sum = Matrix::Zero(K, K);
        for (Eigen::Index t = 0; t + 1 < T; ++t) {
            const RowVector next = lik.row(t + 1).cwiseProduct(beta.row(t + 1));
            xi_sum.noalias() += (pass.alpha.row(t).transpose() * next).cwiseProduct(spec.transition)
                                / pass.scale(t + 1);
        }

        spec.initial = gamma.row(0).transpose();
        const RowVector occupancy_head = gamma.topRows(T - 1).colwise().sum();
        Matrix symbol_mass = Matrix::Zero(K, S);
        for (Eigen::Index t = 0; t < T; ++t) {
            symbol_mass.col(observations[static_cast<std::size_t>(t)]) += gamma.row(t).transpose();
        }
        for (int i = 0; i < K; ++i) {
            if (occupancy_head(i) > 0.0 && xi_sum.row(i).sum() > 0.0) {
                spec.transition.row(i) = xi_sum.row(i) / xi_sum.row(i).sum();
            }
            const double mass = symbol_mass.row(i).sum();
            if (mass > 0.0) {
                spec.emission.row(i) = symbol_mass.row(i) / mass;
            }
        }
        spec.initial /= spec.initial.sum();
    }
    const Matrix lik = emission_likelihoods(spec, observations);
    const ScaledPass pass = scaled_forward(spec, lik);
    result.log_likelihood = pass.impossible ? kNegInf : pass.scale.array().log().sum();
    result.trace.push_back(result.log_likelihood);
    return result;
}

BaumWelchResult baum_welch(const StateSequence& observations, int n_hidden, int n_observed,
                           const BaumWelchOptions& options)
{
    require(n_hidden >= 1, "n_hidden must be at least 1");
    require(n_observed >= 1, "n_observed must be at least 1");
    require(observations.size() >= 2, "Baum-Welch needs at least two observations");
    require(options.restarts >= 1 && options.max_iter >= 1, "restarts and max_iter must be positive");

    BaumWelchResult best;
    best.log_likelihood = kNegInf;
    bool have_best = false;
    for (int r = 0; r < options.restarts; ++r) {
        auto engine = make_engine(options.seed, Stream::Restarts, static_cast<std::uint32_t>(r));
        HmmSpec start = HmmSpec::uniform(n_hidden, n_observed);
        for (int i = 0; i < n_hidden; ++i) {
            start.transition.row(i) = random_row(n_hidden, engine);
            start.emission.row(i) = random_row(n_observed, engine);
        }
        BaumWelchResult run = baum_welch_from(observations, std::move(start), options.max_iter, options.tol);
        run.restart = r;
        if (!have_best || run.log_likelihood > best.log_likelihood) {
            best = std::move(run);
            have_best = true;
        }
    }
    return best;
}

HmmSpec flatten_factorial(const std::vector<HmmSpec>& chains)
{
    require(!chains.empty(), "factorial model needs at least one chain");
    long long states = 1;
    long long symbols = 1;
    for (const HmmSpec& chain : chains) {
        chain.validate();
        states *= chain.n_hidden();
        symbols *= chain.n_observed();
        if (states > kMaxProductStates || symbols > kMaxProductStates) {
            throw CapacityError("product state space exceeds " + std::to_string(kMaxProductStates));
        }
    }
    HmmSpec flat = chains.front();
    for (std::size_t c = 1; c < chains.size(); ++c) {
        const HmmSpec& next = chains[c];
        HmmSpec joined;
        joined.initial.resize(flat.initial.size() * next.initial.size());
        joined.transition.resize(joined.initial.size(), joined.initial.size());
        joined.emission.resize(joined.initial.size(), flat.emission.cols() * next.emission.cols());
        for (Eigen::Index i = 0; i < flat.initial.size(); ++i) {
            joined.initial.segment(i * next.initial.size(), next.initial.size()) = flat.initial(i) * next.initial;
            for (Eigen::Index j = 0; j < flat.initial.size(); ++j) {
                joined.transition.block(i * next.transition.rows(), j * next.transition.cols(),
                                        next.transition.rows(), next.transition.cols())
                    = flat.transition(i, j) * next.transition;
            }
            for (Eigen::Index o = 0; o < flat.emission.cols(); ++o) {
                joined.emission.block(i * next.emission.rows(), o * next.emission.cols(),
                                      next.emission.rows(), next.emission.cols())
                    = flat.emission(i, o) * next.emission;
            }
        }
        flat = std::move(joined);
    }
    return flat;
}

Vector stationary_distribution(const Matrix& transition)
{
    const Eigen::Index K = transition.rows();
    // Solve pi (P - I) = 0 with sum(pi) = 1 as an overdetermined least-squares system.
    Matrix system(K + 1, K);
    system.topRows(K) = (transition - Matrix::Identity(K, K)).transpose();
    system.row(K).setOnes();
    Vector rhs = Vector::Zero(K + 1);
    rhs(K) = 1.0;
    return system.colPivHouseholderQr().solve(rhs);
}

} // namespace hro
