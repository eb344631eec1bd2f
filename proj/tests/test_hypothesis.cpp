#include <algorithm>

#include "doctest.h"
#include "impvar/hypothesis.hpp"
#include "support.hpp"

using namespace impvar;

namespace {

bool failed(const AuditReport& r, const std::string& id) {
    const auto ids = r.failed_ids();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

}  // namespace

TEST_CASE("example passes every hypothesis") {
    const AuditReport r = audit(test::load("example4.prob"));
    CHECK(r.overall());
    for (const char* id : {"F0", "F1", "F2", "F3", "F4", "F5", "I1", "I2", "I3", "G", "H"}) {
        CAPTURE(id);
        REQUIRE(r.find(id) != nullptr);
        CHECK(r.find(id)->pass);
        CHECK(r.find(id)->samples > 0);
    }
    CHECK(r.find("F3")->indicative);
    CHECK(r.find("F0")->note.find("finiteness") != std::string::npos);
    CHECK(audit(test::load("example4_g1.prob")).overall());
}

TEST_CASE("adversarial variants fail with the right id") {
    CHECK(failed(audit(test::load("even_impulse.prob")), "I1"));
    const AuditReport sq = audit(test::load("superquadratic.prob"));
    CHECK((failed(sq, "F2") || failed(sq, "F3")));
    const AuditReport b3 = audit(test::load("beta3.prob"));
    CHECK(failed(b3, "H"));
    CHECK(b3.failed_ids().size() == 1);
}

TEST_CASE("targeted violations") {
    SUBCASE("f not odd") {
        const auto s = test::example4_variant(
            {{"f = \"abs(u)^(-1/2)*u*(1 + 0.1*sin(abs(u)))\"", "f = \"abs(u)^(-1/2)*u*(1 + 0.1*sin(u))\""}});
        CHECK(failed(audit(s), "F1"));
    }
    SUBCASE("impulse grows too fast") {
        const auto s = test::example4_variant({{"I = \"abs(u)^(-2/3)*u\"", "I = \"20*abs(u)^(-2/3)*u\""}});
        CHECK(failed(audit(s), "I2"));
    }
    SUBCASE("negative impulse primitive") {
        const auto s = test::example4_variant({{"I = \"abs(u)^(-2/3)*u\"", "I = \"-abs(u)^(-2/3)*u\""}});
        CHECK(failed(audit(s), "I3"));
    }
    SUBCASE("a_star above the lower growth") {
        const auto s = test::example4_variant({{"a_star = 0.56", "a_star = 0.7"}});
        CHECK(failed(audit(s), "F5"));
    }
    SUBCASE("f exceeds the upper growth") {
        const auto s = test::example4_variant({{"a1 = 1.1", "a1 = 0.9"}, {"a_star = 0.56", "a_star = 0.5"}});
        CHECK(failed(audit(s), "F4"));
    }
    SUBCASE("any continuous g has an envelope") {
        const auto s = test::example4_variant({{"[nonlinearity.0]\nf = \"abs(u)^(-1/2)*u\"\ng = \"0\"",
                                                "[nonlinearity.0]\nf = \"abs(u)^(-1/2)*u\"\ng = \"u^2\""}});
        CHECK(audit(s).find("G")->pass);
    }
}

TEST_CASE("reports serialise") {
    const AuditReport r = audit(test::load("even_impulse.prob"), 2000);
    const std::string text = r.to_text();
    CHECK(text.find("I1") != std::string::npos);
    const std::string json = r.to_json();
    CHECK(json.find("\"id\": \"I1\"") != std::string::npos);
    CHECK(json.find("\"pass\": false") != std::string::npos);
}

TEST_CASE("closed forms of the example") {
    const AuditReport r = verify_example_closed_forms();
    CHECK(r.overall());
    for (const char* id : {"F0-closed", "F1-lower", "I1-hat", "I2-hat", "I3-display"}) {
        CAPTURE(id);
        REQUIRE(r.find(id) != nullptr);
        CHECK(r.find(id)->pass);
    }
}

TEST_CASE("margin tracker") {
    MarginTracker m("X", "x <= y");
    m.le(1.0, 2.0, 0.0, 0.1);
    m.le(1.0, 1.0, 0.5, 0.2);
    AuditEntry e = m.finish();
    CHECK(e.pass);
    CHECK(e.worst_margin == 0.0);
    CHECK(e.witness_t == 0.5);
    CHECK(e.marginal);
    m.le(1.0, 1.0, 0.7, 0.3, true);
    e = m.finish();
    CHECK_FALSE(e.pass);
    CHECK(e.witness_t == 0.7);

    MarginTracker z("Z");
    z.le(0.0, 0.0, 0.0, 0.0);
    CHECK_FALSE(z.finish().marginal);
    CHECK(z.finish().pass);

    MarginTracker n("N");
    n.near(1.0, 1.0 + 1e-13, 1e-12, 1.0, 0.0, 0.0);
    CHECK(n.finish().pass);
    n.near(1.0, 1.1, 1e-12, 1.0, 0.2, 0.0);
    CHECK_FALSE(n.finish().pass);
    CHECK_FALSE(n.finish().marginal);
}
