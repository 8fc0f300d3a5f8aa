// Estimate ||p - q||^2 from two black-box samplers and compare with the
// exact expectation of the same loss.
#include <cstdio>

#include <bbp/bbp.hpp>

int main()
{
    using namespace bbp;

    Domain domain({"heads", "tails"});
    Distribution<double> p({0.25, 0.75});
    Distribution<double> q({0.5, 0.5});

    auto ell = builtin_l2<Rational>(2);
    std::printf("%s: degree %d in the model, %d in the target\n", ell.name().c_str(), ell.deg_p(), ell.deg_q());

    auto exact_loss = compile_bb(ell, 2, 2);
    Distribution<Rational> pr({Rational(1, 4), Rational(3, 4)});
    Distribution<Rational> qr({Rational(1, 2), Rational(1, 2)});
    std::printf("exact expected loss %s, divergence %s\n", format_scalar(exact_expected_loss(exact_loss, pr, qr)).c_str(),
                format_scalar(ell.evaluate(pr, qr)).c_str());

    try
    {
        compile_bb(ell, 1, 2);
    }
    catch (DegreeGateError const& e)
    {
        std::printf("n=1 refused: %s\n", e.what());
    }

    auto model = SampleSource::internal(domain, p);
    auto target = SampleSource::internal(domain, q);
    auto report = estimate_loss(model, target, squared_loss_bb<double>(2, 2), 100000, 7);
    std::printf("Monte Carlo mean %.5f +- %.5f (95%% CI [%.5f, %.5f])\n", report.mean, report.std_error, report.ci_low,
                report.ci_high);

    // a larger sample split into blocks of two draws lowers the variance
    auto rbb = squared_loss_rbb<double>(2);
    Histogram big = draw_fixed(model, 200, 11);
    std::printf("block average over 100 blocks: %.5f\n", block_average(big, rbb, q, 3));
    return 0;
}
