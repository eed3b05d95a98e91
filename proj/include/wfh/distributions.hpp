#ifndef WFH_DISTRIBUTIONS_HPP
#define WFH_DISTRIBUTIONS_HPP

#include <map>
#include <utility>

namespace wfh {

// Truncation rule for the model's infinite sums: extend a summation index
// until the neglected mass bound drops below tail_epsilon, never past
// hard_cap photons. Constructed distributions renormalize the kept mass
// and keep the pre-normalization deficit as diagnostic metadata.
struct TruncationPolicy {
    double tail_epsilon = 1e-12;
    int hard_cap = 256;

    void validate() const;
};

// Probability mass over photon number n >= 0. Entries below 1e-300 are
// dropped to keep the mapping sparse; the constructor renormalizes and
// records the pre-normalization mass.
class PhotonDist {
  public:
    explicit PhotonDist(std::map<int, double> weights);

    double prob(int n) const;
    const std::map<int, double> &probs() const { return probs_; }
    double raw_sum() const { return raw_sum_; }
    double deficit() const { return 1.0 - raw_sum_; }
    double mean() const;
    double variance() const;
    int max_outcome() const;

  private:
    std::map<int, double> probs_;
    double raw_sum_ = 0.0;
};

// Probability mass over detector outcome pairs (m, n), both >= 0.
class JointPhotonDist {
  public:
    using Key = std::pair<int, int>;

    explicit JointPhotonDist(std::map<Key, double> weights);

    double prob(int m, int n) const;
    const std::map<Key, double> &probs() const { return probs_; }
    double raw_sum() const { return raw_sum_; }
    double deficit() const { return 1.0 - raw_sum_; }

  private:
    std::map<Key, double> probs_;
    double raw_sum_ = 0.0;
};

// Probability mass over the signed photon-number difference.
class DiffDist {
  public:
    explicit DiffDist(std::map<int, double> weights);

    double prob(int dn) const;
    const std::map<int, double> &probs() const { return probs_; }
    double raw_sum() const { return raw_sum_; }
    double deficit() const { return 1.0 - raw_sum_; }
    double mean() const;
    double variance() const;

  private:
    std::map<int, double> probs_;
    double raw_sum_ = 0.0;
};

}  // namespace wfh

#endif
