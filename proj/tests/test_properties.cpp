#include "support/properties.hpp"

#include <gtest/gtest.h>

namespace {

constexpr int kInstances = 100;

void expect_clean(const props::Outcome& o)
{
    EXPECT_EQ(o.instances, kInstances);
    EXPECT_EQ(o.violations, 0) << o.name << ": first failure at " << o.first_failure << ", worst " << o.worst;
}

} // namespace

TEST(Properties, ConjugateClosure) { expect_clean(props::conjugate_closure(kInstances, 1000)); }
TEST(Properties, AmplitudeOrdering) { expect_clean(props::amplitude_ordering(kInstances, 2000)); }
TEST(Properties, PrincipalBranch) { expect_clean(props::principal_branch(kInstances, 3000)); }
TEST(Properties, FactorOrthonormality) { expect_clean(props::factor_orthonormality(kInstances, 4000)); }
TEST(Properties, TprodEquivalence) { expect_clean(props::tprod_equivalence(kInstances, 5000)); }
TEST(Properties, MultidimFixedPoint) { expect_clean(props::multidim_fixed_point(kInstances, 6000)); }
TEST(Properties, DelayOneEquivalence) { expect_clean(props::delay_one_equivalence(kInstances, 7000)); }
TEST(Properties, ExactRecovery) { expect_clean(props::exact_recovery(kInstances, 8000)); }
TEST(Properties, MonotoneTruncation) { expect_clean(props::monotone_truncation(kInstances, 9000)); }
TEST(Properties, ReconstructionRealness) { expect_clean(props::reconstruction_realness(kInstances, 10000)); }
