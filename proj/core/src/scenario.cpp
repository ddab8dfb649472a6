#include "remfl/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace remfl {

namespace {

using nlohmann::json;

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

void expect_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) known = true;
        if (!known)
            throw std::invalid_argument(std::string("scenario: unknown key \"") + key +
                                        "\" in " + where);
    }
}

/// Reads a power that may be given in watts or dBm, but not both.
double read_power_w(const json& obj, const std::string& stem, double fallback_w) {
    const std::string w_key = stem + "_w";
    const std::string dbm_key = stem + "_dbm";
    if (obj.contains(w_key) && obj.contains(dbm_key))
        throw std::invalid_argument("scenario: give " + stem + " in watts or dBm, not both");
    if (obj.contains(w_key)) return obj.at(w_key).get<double>();
    if (obj.contains(dbm_key)) return dbm_to_watts(obj.at(dbm_key).get<double>());
    return fallback_w;
}

}  // namespace

double distance_m(const Position& a, const Position& b) {
    return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m);
}

std::vector<int> centered_usable_subchannels(int n_subchannels, int n_usable) {
    if (n_usable <= 0 || n_usable >= n_subchannels || n_usable % 2 != 0)
        throw std::invalid_argument(
            "centered_usable_subchannels: n_usable must be even and in (0, n_subchannels)");
    std::vector<int> bins;
    bins.reserve(n_usable);
    const int half = n_usable / 2;
    for (int f = 1; f <= half; ++f) bins.push_back(f);
    for (int f = n_subchannels - half; f < n_subchannels; ++f) bins.push_back(f);
    return bins;
}

int ScenarioConfig::capture_samples(int channel_index) const {
    return learning.n_s * channels.at(channel_index).n_subchannels;
}

ScenarioConfig default_scenario() {
    ScenarioConfig s;

    constexpr int n_locations = 30;
    constexpr double route_length_m = 1000.0;
    const double spacing = route_length_m / n_locations;
    s.locations.reserve(n_locations);
    for (int l = 0; l < n_locations; ++l)
        s.locations.push_back({spacing * (l + 0.5), 0.0});

    for (double f : {2.412e9, 2.437e9, 2.462e9}) {
        ChannelConfig ch;
        ch.center_freq_hz = f;
        ch.bandwidth_hz = 10e6;
        ch.n_subchannels = 64;
        ch.subcarrier_spacing_hz = ch.bandwidth_hz / ch.n_subchannels;
        ch.usable_subchannels = centered_usable_subchannels(64, 48);
        s.channels.push_back(std::move(ch));
    }

    // 11 access points, 4/4/3 across the channels, scattered near the route.
    const struct {
        double x, y, power_w;
        int channel;
    } aps[] = {
        {80.0, 18.0, 1.00, 0},  {310.0, -32.0, 1.58, 0}, {560.0, 26.0, 0.79, 0},
        {810.0, -15.0, 1.26, 0}, {150.0, -24.0, 1.26, 1}, {420.0, 30.0, 0.79, 1},
        {660.0, -20.0, 1.58, 1}, {920.0, 35.0, 1.00, 1},  {60.0, 28.0, 1.58, 2},
        {490.0, -26.0, 1.00, 2}, {860.0, 22.0, 1.26, 2},
    };
    for (const auto& ap : aps)
        s.access_points.push_back({{ap.x, ap.y}, ap.channel, TrafficModel{}, ap.power_w});

    // 4-tap exponential power-delay profile, 3 dB per tap.
    double pdp_sum = 0.0;
    for (int t = 0; t < 4; ++t) {
        s.pdp_powers.push_back(std::pow(10.0, -0.3 * t));
        pdp_sum += s.pdp_powers.back();
    }
    for (double& p : s.pdp_powers) p /= pdp_sum;

    s.em.quantize_bins = 1024;
    s.seeds.reserve(20);
    for (std::uint64_t i = 1; i <= 20; ++i) s.seeds.push_back(i);
    return s;
}

void validate_scenario(const ScenarioConfig& s) {
    if (s.locations.empty()) throw std::invalid_argument("scenario: no locations");
    if (s.locations.size() >= 3) {
        const double step = distance_m(s.locations[0], s.locations[1]);
        for (std::size_t l = 2; l < s.locations.size(); ++l) {
            const double d = distance_m(s.locations[l - 1], s.locations[l]);
            if (std::fabs(d - step) > 1e-6 * std::max(step, 1.0))
                throw std::invalid_argument("scenario: locations not equally spaced");
        }
    }

    if (s.channels.empty()) throw std::invalid_argument("scenario: no channels");
    std::set<double> freqs;
    for (const auto& ch : s.channels) {
        if (!freqs.insert(ch.center_freq_hz).second)
            throw std::invalid_argument("scenario: duplicate channel center frequency");
        if (ch.center_freq_hz <= 0 || ch.bandwidth_hz <= 0 || ch.n_subchannels <= 0 ||
            ch.subcarrier_spacing_hz <= 0)
            throw std::invalid_argument("scenario: channel parameters must be positive");
        if (std::fabs(ch.bandwidth_hz - ch.n_subchannels * ch.subcarrier_spacing_hz) >
            0.01 * ch.bandwidth_hz)
            throw std::invalid_argument(
                "scenario: bandwidth does not match n_subchannels * subcarrier_spacing");
        if (ch.usable_subchannels.empty() ||
            ch.usable_subchannels.size() > static_cast<std::size_t>(ch.n_subchannels))
            throw std::invalid_argument("scenario: invalid usable sub-channel count");
        std::set<int> seen;
        for (int f : ch.usable_subchannels) {
            if (f < 0 || f >= ch.n_subchannels)
                throw std::invalid_argument("scenario: usable sub-channel index out of range");
            if (!seen.insert(f).second)
                throw std::invalid_argument("scenario: duplicate usable sub-channel index");
        }
    }

    for (const auto& ap : s.access_points) {
        if (ap.channel_index < 0 ||
            ap.channel_index >= static_cast<int>(s.channels.size()))
            throw std::invalid_argument("scenario: access point channel index out of range");
        if (!(ap.tx_power_w > 0)) throw std::invalid_argument("scenario: tx_power must be > 0");
        if (!(ap.traffic.idle_rate_per_ms > 0) || !(ap.traffic.busy_ms > 0))
            throw std::invalid_argument("scenario: traffic parameters must be > 0");
    }

    if (s.pdp_powers.empty()) throw std::invalid_argument("scenario: empty power-delay profile");
    double pdp_sum = 0.0;
    for (double p : s.pdp_powers) {
        if (!(p >= 0)) throw std::invalid_argument("scenario: negative PDP tap");
        pdp_sum += p;
    }
    if (std::fabs(pdp_sum - 1.0) > 1e-9)
        throw std::invalid_argument("scenario: PDP powers must sum to 1");

    if (!(s.link.tx_power_per_subchannel_w > 0) || !(s.link.capacity_threshold_bps > 0) ||
        !(s.link.leader_tail_distance_m > 0))
        throw std::invalid_argument("scenario: link parameters must be positive");
    if (!(s.temperature_k > 0)) throw std::invalid_argument("scenario: temperature must be > 0");
    if (s.learning.k < 1 || s.learning.n_s < 1)
        throw std::invalid_argument("scenario: learning parameters must be >= 1");
    if (s.mixture_components < 1)
        throw std::invalid_argument("scenario: mixture_components must be >= 1");
    if (s.learning.n_s < 2 * s.mixture_components)
        throw std::invalid_argument("scenario: n_s must be at least 2*J");
    if (s.platoons < 1 || s.laps < 1)
        throw std::invalid_argument("scenario: platoons and laps must be >= 1");
}

ScenarioConfig scenario_from_json(const std::string& text) {
    ScenarioConfig s = default_scenario();
    const json doc = json::parse(text);
    expect_keys(doc, "document",
                {"locations", "route", "access_points", "channels", "link", "path_loss",
                 "pdp_powers", "temperature_k", "learning", "modeling", "experiment"});

    if (doc.contains("route") && doc.contains("locations"))
        throw std::invalid_argument("scenario: give route or locations, not both");
    if (doc.contains("route")) {
        const json& r = doc.at("route");
        expect_keys(r, "route", {"length_m", "n_locations"});
        const double length = r.at("length_m").get<double>();
        const int n = r.at("n_locations").get<int>();
        if (length <= 0 || n < 1) throw std::invalid_argument("scenario: bad route");
        s.locations.clear();
        for (int l = 0; l < n; ++l) s.locations.push_back({length / n * (l + 0.5), 0.0});
    }
    if (doc.contains("locations")) {
        s.locations.clear();
        for (const json& p : doc.at("locations")) {
            expect_keys(p, "locations[]", {"x_m", "y_m"});
            s.locations.push_back({p.at("x_m").get<double>(), p.value("y_m", 0.0)});
        }
    }

    if (doc.contains("channels")) {
        s.channels.clear();
        for (const json& c : doc.at("channels")) {
            expect_keys(c, "channels[]",
                        {"center_freq_hz", "bandwidth_hz", "n_subchannels",
                         "subcarrier_spacing_hz", "usable_subchannels", "n_usable"});
            ChannelConfig ch;
            ch.center_freq_hz = c.at("center_freq_hz").get<double>();
            ch.bandwidth_hz = c.value("bandwidth_hz", 10e6);
            ch.n_subchannels = c.value("n_subchannels", 64);
            ch.subcarrier_spacing_hz =
                c.value("subcarrier_spacing_hz", ch.bandwidth_hz / ch.n_subchannels);
            if (c.contains("usable_subchannels") && c.contains("n_usable"))
                throw std::invalid_argument(
                    "scenario: give usable_subchannels or n_usable, not both");
            if (c.contains("usable_subchannels"))
                ch.usable_subchannels = c.at("usable_subchannels").get<std::vector<int>>();
            else
                ch.usable_subchannels =
                    centered_usable_subchannels(ch.n_subchannels, c.value("n_usable", 48));
            s.channels.push_back(std::move(ch));
        }
    }

    if (doc.contains("access_points")) {
        s.access_points.clear();
        for (const json& a : doc.at("access_points")) {
            expect_keys(a, "access_points[]",
                        {"x_m", "y_m", "channel", "tx_power_w", "tx_power_dbm", "traffic"});
            AccessPoint ap;
            ap.position = {a.at("x_m").get<double>(), a.value("y_m", 0.0)};
            ap.channel_index = a.at("channel").get<int>();
            ap.tx_power_w = read_power_w(a, "tx_power", 0.1);
            if (a.contains("traffic")) {
                const json& t = a.at("traffic");
                expect_keys(t, "traffic", {"idle_rate_per_ms", "busy_ms"});
                ap.traffic.idle_rate_per_ms =
                    t.value("idle_rate_per_ms", ap.traffic.idle_rate_per_ms);
                ap.traffic.busy_ms = t.value("busy_ms", ap.traffic.busy_ms);
            }
            s.access_points.push_back(std::move(ap));
        }
    }

    if (doc.contains("link")) {
        const json& l = doc.at("link");
        expect_keys(l, "link",
                    {"tx_power_per_subchannel_w", "tx_power_per_subchannel_dbm",
                     "capacity_threshold_bps", "leader_tail_distance_m", "antenna_gain_db"});
        s.link.tx_power_per_subchannel_w =
            read_power_w(l, "tx_power_per_subchannel", s.link.tx_power_per_subchannel_w);
        s.link.capacity_threshold_bps =
            l.value("capacity_threshold_bps", s.link.capacity_threshold_bps);
        s.link.leader_tail_distance_m =
            l.value("leader_tail_distance_m", s.link.leader_tail_distance_m);
        s.link.antenna_gain_db = l.value("antenna_gain_db", s.link.antenna_gain_db);
    }

    if (doc.contains("path_loss")) {
        const json& p = doc.at("path_loss");
        expect_keys(p, "path_loss",
                    {"near_exponent", "far_exponent", "tx_height_m", "rx_height_m"});
        s.path_loss.near_exponent = p.value("near_exponent", s.path_loss.near_exponent);
        s.path_loss.far_exponent = p.value("far_exponent", s.path_loss.far_exponent);
        s.path_loss.tx_height_m = p.value("tx_height_m", s.path_loss.tx_height_m);
        s.path_loss.rx_height_m = p.value("rx_height_m", s.path_loss.rx_height_m);
    }

    if (doc.contains("pdp_powers")) {
        s.pdp_powers = doc.at("pdp_powers").get<std::vector<double>>();
        double sum = 0.0;
        for (double p : s.pdp_powers) sum += p;
        if (!(sum > 0)) throw std::invalid_argument("scenario: PDP powers must be positive");
        for (double& p : s.pdp_powers) p /= sum;
    }

    s.temperature_k = doc.value("temperature_k", s.temperature_k);

    if (doc.contains("learning")) {
        const json& l = doc.at("learning");
        expect_keys(l, "learning", {"k", "n_s"});
        s.learning.k = l.value("k", s.learning.k);
        s.learning.n_s = l.value("n_s", s.learning.n_s);
    }

    if (doc.contains("modeling")) {
        const json& m = doc.at("modeling");
        expect_keys(m, "modeling", {"components", "em"});
        s.mixture_components = m.value("components", s.mixture_components);
        if (m.contains("em")) {
            const json& e = m.at("em");
            expect_keys(e, "em",
                        {"tolerance", "max_iterations", "restarts", "quantize_bins",
                         "variance_floor_scale"});
            s.em.tolerance = e.value("tolerance", s.em.tolerance);
            s.em.max_iterations = e.value("max_iterations", s.em.max_iterations);
            s.em.restarts = e.value("restarts", s.em.restarts);
            s.em.quantize_bins = e.value("quantize_bins", s.em.quantize_bins);
            s.em.variance_floor_scale =
                e.value("variance_floor_scale", s.em.variance_floor_scale);
        }
    }

    if (doc.contains("experiment")) {
        const json& e = doc.at("experiment");
        expect_keys(e, "experiment", {"platoons", "laps", "seeds"});
        s.platoons = e.value("platoons", s.platoons);
        s.laps = e.value("laps", s.laps);
        if (e.contains("seeds")) s.seeds = e.at("seeds").get<std::vector<std::uint64_t>>();
    }

    validate_scenario(s);
    return s;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scenario: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return scenario_from_json(buffer.str());
    } catch (const json::parse_error& e) {
        throw std::runtime_error("scenario: " + path + ": " + e.what());
    }
}

std::string scenario_to_json(const ScenarioConfig& s) {
    json doc;
    for (const auto& p : s.locations) doc["locations"].push_back({{"x_m", p.x_m}, {"y_m", p.y_m}});
    for (const auto& ap : s.access_points) {
        doc["access_points"].push_back({{"x_m", ap.position.x_m},
                                        {"y_m", ap.position.y_m},
                                        {"channel", ap.channel_index},
                                        {"tx_power_w", ap.tx_power_w},
                                        {"traffic",
                                         {{"idle_rate_per_ms", ap.traffic.idle_rate_per_ms},
                                          {"busy_ms", ap.traffic.busy_ms}}}});
    }
    for (const auto& ch : s.channels) {
        doc["channels"].push_back({{"center_freq_hz", ch.center_freq_hz},
                                   {"bandwidth_hz", ch.bandwidth_hz},
                                   {"n_subchannels", ch.n_subchannels},
                                   {"subcarrier_spacing_hz", ch.subcarrier_spacing_hz},
                                   {"usable_subchannels", ch.usable_subchannels}});
    }
    doc["link"] = {{"tx_power_per_subchannel_w", s.link.tx_power_per_subchannel_w},
                   {"capacity_threshold_bps", s.link.capacity_threshold_bps},
                   {"leader_tail_distance_m", s.link.leader_tail_distance_m},
                   {"antenna_gain_db", s.link.antenna_gain_db}};
    doc["path_loss"] = {{"near_exponent", s.path_loss.near_exponent},
                        {"far_exponent", s.path_loss.far_exponent},
                        {"tx_height_m", s.path_loss.tx_height_m},
                        {"rx_height_m", s.path_loss.rx_height_m}};
    doc["pdp_powers"] = s.pdp_powers;
    doc["temperature_k"] = s.temperature_k;
    doc["learning"] = {{"k", s.learning.k}, {"n_s", s.learning.n_s}};
    doc["modeling"] = {{"components", s.mixture_components},
                       {"em",
                        {{"tolerance", s.em.tolerance},
                         {"max_iterations", s.em.max_iterations},
                         {"restarts", s.em.restarts},
                         {"quantize_bins", s.em.quantize_bins},
                         {"variance_floor_scale", s.em.variance_floor_scale}}}};
    doc["experiment"] = {{"platoons", s.platoons}, {"laps", s.laps}, {"seeds", s.seeds}};
    return doc.dump(2) + "\n";
}

void save_scenario(const ScenarioConfig& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("scenario: cannot write " + path);
    out << scenario_to_json(s);
}

}  // namespace remfl
