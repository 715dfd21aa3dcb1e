#include "auction/auction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace edgeserve::auction {

double buyer_valuation(double quality, double accuracy_cost) { return quality * accuracy_cost; }

double seller_valuation(double util_coef, double switching, double transmission, double computation) {
    return util_coef * (switching + transmission + computation);
}

double ClockConfig::theta(std::size_t adjustment) const {
    if (schedule.empty()) return step;
    return schedule[std::min(adjustment, schedule.size() - 1)];
}

void validate(const ClockConfig& cfg) {
    if (!(cfg.p_min >= 0.0) || !(cfg.p_max > cfg.p_min)) throw DomainError("auction: need p_max > p_min >= 0");
    if (!(cfg.step > 0.0)) throw DomainError("auction: clock step must be > 0");
    for (double s : cfg.schedule)
        if (!(s > 0.0)) throw DomainError("auction: clock schedule steps must be > 0");
    if (!(cfg.clear_weight >= 0.0 && cfg.clear_weight <= 1.0)) throw DomainError("auction: clear weight must lie in [0, 1]");
}

namespace {

// Clock arithmetic accumulates rounding; comparisons allow this much slack.
double slack(const ClockConfig& cfg) { return 1e-9 * (cfg.p_max - cfg.p_min); }

void settle(AuctionOutcome& out, const std::vector<BuyBid>& bids, const std::vector<SellBid>& asks,
            std::vector<std::size_t> buyers, std::vector<std::size_t> sellers, double eps) {
    // buyers / sellers are indices into bids / asks, already ranked best first.
    const std::size_t q = std::min(buyers.size(), sellers.size());
    buyers.resize(q);
    sellers.resize(q);
    for (std::size_t k = 0; k < q; ++k) {
        const double u = bids[buyers[k]].bid - out.price;
        const double v = out.price - asks[sellers[k]].ask;
        if (u < -eps || v < -eps) {
            ++out.ir_removed;
            continue;
        }
        out.winners_buy.push_back(bids[buyers[k]].id);
        out.winners_sell.push_back(asks[sellers[k]].id);
        out.buyer_utility.push_back(u);
        out.seller_utility.push_back(v);
    }
    out.social_welfare = social_welfare(out);
}

std::vector<std::size_t> rank_buyers(const std::vector<BuyBid>& bids, std::vector<std::size_t> idx) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (bids[a].bid != bids[b].bid) return bids[a].bid > bids[b].bid;
        return bids[a].id < bids[b].id;
    });
    return idx;
}

std::vector<std::size_t> rank_sellers(const std::vector<SellBid>& asks, std::vector<std::size_t> idx) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (asks[a].ask != asks[b].ask) return asks[a].ask < asks[b].ask;
        return asks[a].id < asks[b].id;
    });
    return idx;
}

}  // namespace

AuctionOutcome dda_run(const std::vector<BuyBid>& bids, const std::vector<SellBid>& asks, const ClockConfig& cfg) {
    validate(cfg);
    if (bids.empty() || asks.empty()) throw DomainError("auction: empty market");
    const double eps = slack(cfg);

    // Participants in admission order; each round advances two cursors.
    std::vector<std::size_t> order_b(bids.size()), order_s(asks.size());
    std::iota(order_b.begin(), order_b.end(), 0);
    std::iota(order_s.begin(), order_s.end(), 0);
    order_b = rank_buyers(bids, order_b);
    order_s = rank_sellers(asks, order_s);
    std::size_t nb = 0, ns = 0;

    AuctionOutcome out;
    double cb = cfg.p_max, cs = cfg.p_min, moved = 0.0;
    for (;;) {
        // Acceptance at the current clocks.
        std::size_t admitted = 0;
        while (nb < order_b.size() && bids[order_b[nb]].bid >= cb - eps) ++nb, ++admitted;
        while (ns < order_s.size() && asks[order_s[ns]].ask <= cs + eps) ++ns, ++admitted;
        if (cfg.pause && admitted > 0) {
            ++out.rounds;
            continue;
        }
        // Adjustment, unless it would cross the clocks.
        const double theta = cfg.theta(out.adjustments);
        const double next_moved = moved + theta;
        const double next_cb = cfg.p_max - next_moved, next_cs = cfg.p_min + next_moved;
        if (next_cb < next_cs - eps) break;
        moved = next_moved;
        cb = next_cb;
        cs = next_cs;
        ++out.adjustments;
        ++out.rounds;
    }

    out.final_buyer_clock = cb;
    out.final_seller_clock = cs;
    out.price = cfg.clear_weight * cb + (1.0 - cfg.clear_weight) * cs;

    order_b.resize(nb);
    order_s.resize(ns);
    out.admitted_buy = nb;
    out.admitted_sell = ns;
    settle(out, bids, asks, std::move(order_b), std::move(order_s), eps);
    return out;
}

AuctionOutcome ida_run(const std::vector<BuyBid>& bids, const std::vector<SellBid>& asks) {
    if (bids.empty() || asks.empty()) throw DomainError("auction: empty market");
    std::vector<std::size_t> b(bids.size()), s(asks.size());
    std::iota(b.begin(), b.end(), 0);
    std::iota(s.begin(), s.end(), 0);
    b = rank_buyers(bids, b);
    s = rank_sellers(asks, s);
    std::size_t q = 0;
    while (q < std::min(b.size(), s.size()) && bids[b[q]].bid >= asks[s[q]].ask) ++q;
    AuctionOutcome out;
    out.admitted_buy = out.admitted_sell = q;
    if (q == 0) return out;
    out.price = 0.5 * (bids[b[q - 1]].bid + asks[s[q - 1]].ask);
    b.resize(q);
    s.resize(q);
    settle(out, bids, asks, b, s, 0.0);
    return out;
}

double social_welfare(const AuctionOutcome& o) {
    double sw = 0.0;
    for (double u : o.buyer_utility) sw += u;
    for (double u : o.seller_utility) sw += u;
    return sw;
}

Mechanism parse_mechanism(std::string_view name) {
    if (name == "dda") return Mechanism::Dda;
    if (name == "ida") return Mechanism::Ida;
    throw Error(ErrorKind::Argument, "unknown mechanism '" + std::string(name) + "' (expected dda or ida)");
}

std::string_view mechanism_name(Mechanism m) { return m == Mechanism::Dda ? "dda" : "ida"; }

Market random_market(std::size_t size, std::uint64_t seed, double p_min, double p_max) {
    Rng rng = make_rng(seed, {0x6d6b74, size});
    std::uniform_real_distribution<double> price(p_min, p_max);
    Market m;
    for (std::size_t k = 0; k < size; ++k) m.bids.push_back(BuyBid{k, price(rng), 0.0, 0.0});
    for (std::size_t k = 0; k < size; ++k) m.asks.push_back(SellBid{k, price(rng), 0.0, 0.0, 0.0, 0.0});
    return m;
}

AuctionOutcome run(Mechanism m, const Market& market, const ClockConfig& cfg) {
    return m == Mechanism::Dda ? dda_run(market.bids, market.asks, cfg) : ida_run(market.bids, market.asks);
}

std::size_t round_bound(const ClockConfig& cfg, std::size_t buyers, std::size_t sellers) {
    double theta = cfg.step;
    if (!cfg.schedule.empty()) theta = *std::min_element(cfg.schedule.begin(), cfg.schedule.end());
    return static_cast<std::size_t>(std::ceil((cfg.p_max - cfg.p_min) / (2.0 * theta))) + buyers + sellers;
}

namespace {

bool contains(const std::vector<std::size_t>& v, std::size_t id) { return std::find(v.begin(), v.end(), id) != v.end(); }

std::size_t buyer_index(const Market& m, std::size_t id) {
    for (std::size_t k = 0; k < m.bids.size(); ++k)
        if (m.bids[k].id == id) return k;
    return m.bids.size();
}

std::size_t seller_index(const Market& m, std::size_t id) {
    for (std::size_t k = 0; k < m.asks.size(); ++k)
        if (m.asks[k].id == id) return k;
    return m.asks.size();
}

// The helpers below take positions in the market, not participant ids.
bool buyer_wins(Mechanism m, Market market, std::size_t k, double bid, const ClockConfig& cfg) {
    market.bids[k].bid = bid;
    return contains(run(m, market, cfg).winners_buy, market.bids[k].id);
}

double buyer_payoff(Mechanism m, Market market, std::size_t k, double report, double value, const ClockConfig& cfg) {
    market.bids[k].bid = report;
    const auto o = run(m, market, cfg);
    return contains(o.winners_buy, market.bids[k].id) ? value - o.price : 0.0;
}

double seller_payoff(Mechanism m, Market market, std::size_t k, double report, double value, const ClockConfig& cfg) {
    market.asks[k].ask = report;
    const auto o = run(m, market, cfg);
    return contains(o.winners_sell, market.asks[k].id) ? o.price - value : 0.0;
}

}  // namespace

PropertyReport check_properties(Mechanism mech, const std::vector<Market>& markets, const ClockConfig& cfg,
                                std::uint64_t seed) {
    validate(cfg);
    PropertyReport rep;
    Rng rng = make_rng(seed, {0x70726f70});
    const double theta = cfg.schedule.empty() ? cfg.step : *std::max_element(cfg.schedule.begin(), cfg.schedule.end());
    auto note = [&](std::size_t idx, const std::string& what) {
        if (rep.counterexamples.size() < 20) rep.counterexamples.push_back("market " + std::to_string(idx) + ": " + what);
    };

    for (std::size_t mi = 0; mi < markets.size(); ++mi) {
        const Market& mk = markets[mi];
        const AuctionOutcome o = run(mech, mk, cfg);
        ++rep.markets;

        // Individual rationality.
        bool ir = true;
        for (double u : o.buyer_utility) ir &= u >= -1e-9;
        for (double u : o.seller_utility) ir &= u >= -1e-9;
        rep.ir_holds += ir;
        if (!ir) note(mi, "negative winner utility");

        // Budget balance: uniform price, equal cardinality, SW equals matched spreads.
        double payments = 0.0, payouts = 0.0, spread = 0.0;
        for (std::size_t k = 0; k < o.winners_buy.size(); ++k) payments += o.price;
        for (std::size_t k = 0; k < o.winners_sell.size(); ++k) payouts += o.price;
        for (auto id : o.winners_buy) spread += mk.bids[buyer_index(mk, id)].bid;
        for (auto id : o.winners_sell) spread -= mk.asks[seller_index(mk, id)].ask;
        const bool bb = o.winners_buy.size() == o.winners_sell.size() && std::abs(payments - payouts) <= 1e-9 &&
                        std::abs(spread - o.social_welfare) <= 1e-9 * std::max(1.0, std::abs(spread));
        rep.bb_holds += bb;
        if (!bb) note(mi, "budget imbalance");

        // Monotonicity: a winner that improves its price keeps winning.
        bool mono = true;
        for (std::size_t k = 0; k < std::min<std::size_t>(3, o.winners_buy.size()); ++k) {
            const std::size_t at = buyer_index(mk, o.winners_buy[k]);
            std::uniform_real_distribution<double> up(mk.bids[at].bid, cfg.p_max);
            ++rep.monotone_probes;
            if (!buyer_wins(mech, mk, at, up(rng), cfg)) mono = false;
        }
        for (std::size_t k = 0; k < std::min<std::size_t>(3, o.winners_sell.size()); ++k) {
            const std::size_t at = seller_index(mk, o.winners_sell[k]);
            std::uniform_real_distribution<double> down(cfg.p_min, mk.asks[at].ask);
            Market changed = mk;
            changed.asks[at].ask = down(rng);
            ++rep.monotone_probes;
            if (!contains(run(mech, changed, cfg).winners_sell, o.winners_sell[k])) mono = false;
        }
        rep.monotone_holds += mono;
        if (!mono) note(mi, "a winner lost after improving its price");

        // Criticality: bisection for the bid at which a buyer starts winning.
        bool critical = true;
        std::size_t probe = mk.bids.size();
        for (std::size_t k = 0; k < mk.bids.size() && probe == mk.bids.size(); ++k)
            if (!contains(o.winners_buy, mk.bids[k].id)) probe = k;
        if (probe == mk.bids.size()) probe = 0;
        if (buyer_wins(mech, mk, probe, cfg.p_max, cfg)) {
            ++rep.critical_probes;
            double lo = cfg.p_min, hi = cfg.p_max;
            if (buyer_wins(mech, mk, probe, lo, cfg)) {
                hi = lo;
            } else {
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (buyer_wins(mech, mk, probe, mid, cfg) ? hi : lo) = mid;
                }
            }
            const double threshold = hi;
            // Unique flip: winning everywhere above, losing everywhere below.
            for (int s = 1; s <= 8; ++s) {
                const double above = threshold + (cfg.p_max - threshold) * s / 8.0;
                const double below = cfg.p_min + (threshold - cfg.p_min) * (s - 1) / 8.0;
                if (!buyer_wins(mech, mk, probe, above, cfg)) critical = false;
                if (threshold - below > 1e-9 && buyer_wins(mech, mk, probe, below, cfg)) critical = false;
            }
            if (mech == Mechanism::Dda) {
                Market top = mk;
                top.bids[probe].bid = cfg.p_max;
                const auto ref = run(mech, top, cfg);
                if (ref.admitted_buy <= ref.admitted_sell && std::abs(threshold - ref.final_buyer_clock) > theta)
                    critical = false;
            }
        }
        rep.critical_holds += critical;
        if (!critical) note(mi, "winning threshold not unique or away from the buyer clock");

        // Round bound.
        const bool rounds_ok = o.rounds <= round_bound(cfg, mk.bids.size(), mk.asks.size());
        rep.rounds_hold += rounds_ok;
        if (!rounds_ok) note(mi, "round bound exceeded");

        // Regret probe: truthful value = submitted price; grid of misreports.
        const bool unconstrained = o.admitted_buy == o.trades() && o.admitted_sell == o.trades();
        double regret = 0.0;
        const std::size_t sample = std::min<std::size_t>(4, std::min(mk.bids.size(), mk.asks.size()));
        std::uniform_int_distribution<std::size_t> pick_b(0, mk.bids.size() - 1), pick_s(0, mk.asks.size() - 1);
        for (std::size_t s = 0; s < sample; ++s) {
            const std::size_t b = pick_b(rng), a = pick_s(rng);
            const double vb = mk.bids[b].bid, va = mk.asks[a].ask;
            const double truthful_b = buyer_payoff(mech, mk, b, vb, vb, cfg);
            const double truthful_s = seller_payoff(mech, mk, a, va, va, cfg);
            for (int g = 0; g <= 20; ++g) {
                const double report = cfg.p_min + (cfg.p_max - cfg.p_min) * g / 20.0;
                regret = std::max(regret, buyer_payoff(mech, mk, b, report, vb, cfg) - truthful_b);
                regret = std::max(regret, seller_payoff(mech, mk, a, report, va, cfg) - truthful_s);
            }
        }
        rep.max_regret = std::max(rep.max_regret, regret);
        if (unconstrained) rep.max_regret_unconstrained = std::max(rep.max_regret_unconstrained, regret);
    }
    return rep;
}

}  // namespace edgeserve::auction
