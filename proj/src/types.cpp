#include "secoff/types.hpp"

#include <cmath>

namespace secoff {

namespace {

void require(bool ok, const std::string& field) {
    if (!ok) throw std::invalid_argument("SystemConfig: invalid " + field);
}

void require_positive(const VectorXd& v, int users, const std::string& field) {
    require(v.size() == users, field + " size");
    for (int k = 0; k < users; ++k) require(v[k] > 0.0, field);
}

}  // namespace

void SystemConfig::validate() const {
    require(users >= 1, "users");
    require(bandwidth_hz > 0.0, "bandwidth_hz");
    require(deadline_s > 0.0, "deadline_s");
    require(path_loss_exp > 0.0, "path_loss_exp");
    require(noise_bs_w > 0.0, "noise_bs_w");
    require(noise_eve_w > 0.0, "noise_eve_w");
    require(secrecy_outage_max > 0.0 && secrecy_outage_max < 1.0,
            "secrecy_outage_max");
    require(task_bits.size() == users, "task_bits size");
    for (int k = 0; k < users; ++k)
        require(task_bits[k] >= 0.0 && std::isfinite(task_bits[k]), "task_bits");
    require_positive(cycles_per_bit, users, "cycles_per_bit");
    require_positive(capacitance, users, "capacitance");
    require_positive(dist_bs_m, users, "dist_bs_m");
    require_positive(dist_eve_m, users, "dist_eve_m");
}

Allocation Allocation::zeros(int users) {
    Allocation a;
    a.local_bits = VectorXd::Zero(users);
    a.power_w = VectorXd::Zero(users);
    a.codeword_rate = VectorXd::Zero(users);
    a.secret_rate = VectorXd::Zero(users);
    a.beta = MatrixXd::Zero(users, users);
    return a;
}

double PddState::eta() const { return std::pow(0.3, outer_index); }

PddState PddState::init(int users) {
    PddState s;
    s.lambda1 = MatrixXd::Zero(users, users);
    s.lambda2 = MatrixXd::Zero(users, users);
    s.lambda3 = MatrixXd::Zero(users, users);
    return s;
}

}  // namespace secoff
