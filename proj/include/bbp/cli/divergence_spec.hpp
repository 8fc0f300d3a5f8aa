#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "../divergences.hpp"
#include "../error.hpp"
#include "../numeric.hpp"

namespace bbp::cli {

//! A parsed --divergence argument: a polynomial with exact coefficients or a series divergence.
struct DivergenceSpec
{
    std::optional<PolyDivergence<Rational>> poly;
    std::optional<SeriesDivergence> series;

    bool is_poly() const noexcept { return poly.has_value(); }
    std::string name() const { return poly ? poly->name() : series->name(); }

    Divergence as_float() const
    {
        if (poly)
            return poly->convert<double>();
        return *series;
    }
};

inline char const* builtin_names = "l2, lk:<even k>, brier, inner-product, cross-entropy, kl, entropy";

//! Builtin by name over a domain of size d; nullopt if the name is unknown.
inline std::optional<DivergenceSpec> builtin_divergence(std::string const& name, std::size_t d)
{
    if (name == "l2")
        return DivergenceSpec{builtin_l2<Rational>(d), std::nullopt};
    if (name == "brier")
        return DivergenceSpec{builtin_brier<Rational>(d), std::nullopt};
    if (name == "inner-product")
        return DivergenceSpec{builtin_inner_product<Rational>(d), std::nullopt};
    if (name.rfind("lk:", 0) == 0)
    {
        int k = 0;
        try
        {
            std::size_t used = 0;
            k = std::stoi(name.substr(3), &used);
            bbp::detail::require(used == name.size() - 3, ErrorCode::ParseError, "bad exponent in '" + name + "'");
        }
        catch (std::logic_error const&)
        {
            bbp::detail::fail(ErrorCode::ParseError, "bad exponent in '" + name + "'");
        }
        return DivergenceSpec{builtin_lk_even<Rational>(d, k), std::nullopt};
    }
    if (name == "cross-entropy")
        return DivergenceSpec{std::nullopt, SeriesDivergence{SeriesKind::CrossEntropy}};
    if (name == "kl")
        return DivergenceSpec{std::nullopt, SeriesDivergence{SeriesKind::KL}};
    if (name == "entropy")
        return DivergenceSpec{std::nullopt, SeriesDivergence{SeriesKind::ShannonEntropy}};
    return std::nullopt;
}

namespace detail {

inline Rational json_coefficient(nlohmann::json const& j)
{
    if (j.is_string())
        return parse_scalar<Rational>(j.get<std::string>());
    if (j.is_number())
        return parse_scalar<Rational>(j.dump());
    bbp::detail::fail(ErrorCode::ParseError, "coefficient must be a number or a string such as \"1/3\"");
}

inline ExponentVector json_exponents(nlohmann::json const& j, char const* field)
{
    bbp::detail::require(j.is_array(), ErrorCode::ParseError, std::string(field) + " must be an array of integers");
    std::vector<int> exps;
    for (auto const& e : j)
    {
        bbp::detail::require(e.is_number_integer(), ErrorCode::ParseError,
                             std::string(field) + " must be an array of integers");
        exps.push_back(e.get<int>());
    }
    return ExponentVector(std::move(exps));
}

}  // namespace detail

/*!
 * Divergence from JSON text. Accepted shapes:
 *
 *   {"builtin": "lk:4", "d": 3}
 *   {"name": "mine", "monomials": [{"coeff": "1/2", "p_exps": [2, 0], "q_exps": [0, 0]}, ...]}
 *
 * \c d falls back to \c default_d when absent; for monomial lists it is the
 * exponent vector length.
 */
inline DivergenceSpec parse_divergence_json(std::string const& text, std::size_t default_d)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (nlohmann::json::exception const& e)
    {
        bbp::detail::fail(ErrorCode::ParseError, std::string("divergence spec is not valid JSON: ") + e.what());
    }
    bbp::detail::require(j.is_object(), ErrorCode::ParseError, "divergence spec must be a JSON object");
    std::size_t d = default_d;
    if (j.contains("d"))
    {
        bbp::detail::require(j["d"].is_number_unsigned(), ErrorCode::ParseError, "\"d\" must be a positive integer");
        d = j["d"].get<std::size_t>();
    }
    if (j.contains("builtin"))
    {
        bbp::detail::require(j["builtin"].is_string(), ErrorCode::ParseError, "\"builtin\" must be a string");
        auto name = j["builtin"].get<std::string>();
        auto spec = builtin_divergence(name, d);
        if (!spec)
            bbp::detail::fail(ErrorCode::ParseError, "unknown builtin divergence '" + name + "'");
        return *spec;
    }
    bbp::detail::require(j.contains("monomials") && j["monomials"].is_array() && !j["monomials"].empty(),
                         ErrorCode::ParseError, "divergence spec needs \"builtin\" or a non-empty \"monomials\" list");
    std::vector<Monomial<Rational>> terms;
    for (auto const& m : j["monomials"])
    {
        bbp::detail::require(m.is_object() && m.contains("coeff") && m.contains("p_exps") && m.contains("q_exps"),
                             ErrorCode::ParseError, "each monomial needs coeff, p_exps and q_exps");
        terms.push_back({detail::json_coefficient(m["coeff"]), detail::json_exponents(m["p_exps"], "p_exps"),
                         detail::json_exponents(m["q_exps"], "q_exps")});
    }
    if (!j.contains("d"))
        d = terms.front().p_exps.size();
    std::string name = j.value("name", std::string("custom"));
    return DivergenceSpec{PolyDivergence<Rational>(d, std::move(terms), name), std::nullopt};
}

//! A builtin name, or a path to a JSON spec file.
inline DivergenceSpec parse_divergence(std::string const& arg, std::size_t d)
{
    if (auto spec = builtin_divergence(arg, d))
        return *spec;
    if (std::filesystem::is_regular_file(arg))
    {
        std::ifstream in(arg);
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_divergence_json(buf.str(), d);
    }
    bbp::detail::fail(ErrorCode::ParseError,
                      "unknown divergence '" + arg + "' (builtins: " + builtin_names + "; or a JSON spec file)");
}

}  // namespace bbp::cli
