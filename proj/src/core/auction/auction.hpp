#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace edgeserve::auction {

struct BuyBid {
    std::size_t id = 0;
    double bid = 0.0;
    double quality = 0.0;        // Q_i
    double accuracy_cost = 0.0;  // reference accuracy cost l_acc
};

struct SellBid {
    std::size_t id = 0;
    double ask = 0.0;
    double util_coef = 0.0;  // g_j
    double switching = 0.0;  // reference cost terms from the simulator
    double transmission = 0.0;
    double computation = 0.0;
};

double buyer_valuation(double quality, double accuracy_cost);
double seller_valuation(double util_coef, double switching, double transmission, double computation);
inline double valuation(const BuyBid& b) { return buyer_valuation(b.quality, b.accuracy_cost); }
inline double valuation(const SellBid& s) {
    return seller_valuation(s.util_coef, s.switching, s.transmission, s.computation);
}

struct ClockConfig {
    double p_max = 100.0;
    double p_min = 0.0;
    double step = 1.0;          // Theta, used when `schedule` is empty
    std::vector<double> schedule;  // optional Theta per adjustment; the last entry repeats
    double clear_weight = 0.5;  // omega: p* = omega C_B + (1 - omega) C_S
    bool pause = true;          // clocks hold in rounds that admit someone

    double theta(std::size_t adjustment) const;
};

/// Throws DomainError when p_max <= p_min, p_min < 0, a step is not positive
/// or omega lies outside [0, 1].
void validate(const ClockConfig& cfg);

struct AuctionOutcome {
    double price = 0.0;
    std::vector<std::size_t> winners_buy;   // buyer ids
    std::vector<std::size_t> winners_sell;  // seller ids
    std::vector<double> buyer_utility;      // aligned with winners_buy
    std::vector<double> seller_utility;     // aligned with winners_sell
    double social_welfare = 0.0;
    std::size_t rounds = 0;        // acceptance pauses plus clock adjustments
    std::size_t adjustments = 0;
    double final_buyer_clock = 0.0;   // C_B^{T-1}
    double final_seller_clock = 0.0;  // C_S^{T-1}
    std::size_t admitted_buy = 0;
    std::size_t admitted_sell = 0;
    std::size_t ir_removed = 0;  // pairs dropped by the IR pass

    std::size_t trades() const { return winners_buy.size(); }
};

/// Double Dutch auction with simulated clocks. Buyers are admitted once
/// bid >= C_B, sellers once ask <= C_S; with the pause rule the clocks move
/// only in rounds without admissions. Clearing happens when the next
/// adjustment would leave C_B < C_S; the price uses the last uncrossed clocks.
/// The larger side is trimmed to equal size (lowest bids / highest asks,
/// then highest id), then any pair with negative utility at p* is removed.
/// Throws DomainError("empty market") when either side is empty.
AuctionOutcome dda_run(const std::vector<BuyBid>& bids, const std::vector<SellBid>& asks, const ClockConfig& cfg);

/// Sorted-matching double auction: q = max{k : bid_(k) >= ask_(k)}, uniform
/// price (bid_(q) + ask_(q)) / 2.
AuctionOutcome ida_run(const std::vector<BuyBid>& bids, const std::vector<SellBid>& asks);

/// Sum of winner utilities.
double social_welfare(const AuctionOutcome& o);

enum class Mechanism { Dda, Ida };
Mechanism parse_mechanism(std::string_view name);
std::string_view mechanism_name(Mechanism m);

struct Market {
    std::vector<BuyBid> bids;
    std::vector<SellBid> asks;
};

/// `size` buyers and `size` sellers with prices uniform on [p_min, p_max].
Market random_market(std::size_t size, std::uint64_t seed, double p_min, double p_max);

AuctionOutcome run(Mechanism m, const Market& market, const ClockConfig& cfg);

struct PropertyReport {
    std::size_t markets = 0;
    std::size_t ir_holds = 0;
    std::size_t bb_holds = 0;
    std::size_t monotone_holds = 0;
    std::size_t critical_holds = 0;
    std::size_t rounds_hold = 0;
    std::size_t monotone_probes = 0;
    std::size_t critical_probes = 0;
    double max_regret = 0.0;              // best unilateral misreport gain, any market
    double max_regret_unconstrained = 0.0;  // same, on markets where trimming does not bind
    std::vector<std::string> counterexamples;

    bool all_pass() const {
        return ir_holds == markets && bb_holds == markets && monotone_holds == markets &&
               critical_holds == markets && rounds_hold == markets;
    }
};

/// Round bound ceil((p_max - p_min) / (2 Theta)) + n + m for a constant step.
std::size_t round_bound(const ClockConfig& cfg, std::size_t buyers, std::size_t sellers);

/// Property sweep over the given markets: IR, BB, bid monotonicity,
/// criticality (unique flip point found by bisection, equal to the final
/// buyer clock when the buyer side is not trimmed), the round bound, and a
/// regret probe over a grid of misreports.
PropertyReport check_properties(Mechanism m, const std::vector<Market>& markets, const ClockConfig& cfg,
                                std::uint64_t seed);

}  // namespace edgeserve::auction
