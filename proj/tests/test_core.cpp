#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>

#include "faultdx/core.hpp"
#include "faultdx/rng.hpp"

using namespace faultdx;

TEST_CASE("fault labels enumerate the seven conditions in encoding order") {
  CHECK(kNumLabels == 7);
  CHECK(static_cast<int>(FaultLabel::Normal) == 0);
  CHECK(static_cast<int>(FaultLabel::Bpfo) == 1);
  CHECK(static_cast<int>(FaultLabel::Bpfi) == 2);
  CHECK(static_cast<int>(FaultLabel::Unbalance) == 3);
  CHECK(static_cast<int>(FaultLabel::Misalignment) == 4);
  CHECK(static_cast<int>(FaultLabel::Looseness) == 5);
  CHECK(static_cast<int>(FaultLabel::GearFault) == 6);

  CHECK(std::string(label_name(FaultLabel::Normal)) == "Normal");
  CHECK(std::string(label_name(FaultLabel::Bpfo)) == "BPFO");
  CHECK(std::string(label_name(FaultLabel::Bpfi)) == "BPFI");
  CHECK(std::string(label_name(FaultLabel::Unbalance)) == "Unbalance");
  CHECK(std::string(label_name(FaultLabel::Misalignment)) == "Misalignment");
  CHECK(std::string(label_name(FaultLabel::Looseness)) == "Looseness");
  CHECK(std::string(label_name(FaultLabel::GearFault)) == "GearFault");

  for (int i = 0; i < kNumLabels; ++i) {
    CHECK(label_from_index(i) == static_cast<FaultLabel>(i));
    CHECK(label_from_name(label_name(label_from_index(i))) == label_from_index(i));
  }
  CHECK_THROWS_AS(label_from_index(-1), std::invalid_argument);
  CHECK_THROWS_AS(label_from_index(7), std::invalid_argument);
  CHECK_FALSE(label_from_name("NotALabel").has_value());
}

TEST_CASE("label_to_onehot sets exactly the label index") {
  for (int i = 0; i < kNumLabels; ++i) {
    const auto oh = label_to_onehot(label_from_index(i));
    for (int j = 0; j < kNumLabels; ++j) CHECK(oh[static_cast<std::size_t>(j)] == (i == j ? 1.0 : 0.0));
  }
}

TEST_CASE("augment ops enumerate none plus the five operators") {
  CHECK(static_cast<int>(AugmentOp::None) == 0);
  CHECK(static_cast<int>(AugmentOp::GaussianNoise) == 1);
  CHECK(static_cast<int>(AugmentOp::MaskingNoise) == 2);
  CHECK(static_cast<int>(AugmentOp::Translation) == 3);
  CHECK(static_cast<int>(AugmentOp::AmplitudeShift) == 4);
  CHECK(static_cast<int>(AugmentOp::TimeStretch) == 5);
  CHECK(std::string(augment_op_name(AugmentOp::None)) == "none");
  CHECK(std::string(augment_op_name(AugmentOp::TimeStretch)) == "time_stretch");
}

TEST_CASE("TimeSeries validates and exposes timing quantities") {
  TimeSeries ts({1.0, 2.0, 3.0, 4.0}, 100.0);
  CHECK(ts.size() == 4);
  CHECK(ts.sample_rate_hz() == 100.0);
  CHECK(ts.nyquist_hz() == doctest::Approx(50.0));
  CHECK(ts.duration_s() == doctest::Approx(0.04));
  CHECK(ts.samples()[2] == 3.0);

  CHECK_THROWS_AS(TimeSeries({}, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(TimeSeries({1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(TimeSeries({1.0}, -5.0), std::invalid_argument);
  CHECK_THROWS_AS(TimeSeries({1.0, std::nan("")}, 10.0), std::invalid_argument);
}

TEST_CASE("Spectrum bin arithmetic") {
  Spectrum s({0.0, 1.0, 2.0, 3.0, 4.0}, 0.5, 0.0, false);
  CHECK(s.size() == 5);
  CHECK(s.df_hz() == 0.5);
  CHECK(s.frequency_at(0) == doctest::Approx(0.0));
  CHECK(s.frequency_at(4) == doctest::Approx(2.0));

  CHECK(s.bin_nearest(0.0) == 0);
  CHECK(s.bin_nearest(0.74) == 1);
  CHECK(s.bin_nearest(0.76) == 2);
  CHECK(s.bin_nearest(100.0) == 4);
  CHECK(s.bin_nearest(-3.0) == 0);

  CHECK_THROWS_AS(Spectrum({}, 1.0, 0.0, false), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum({1.0}, 0.0, 0.0, false), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum({-1.0}, 1.0, 0.0, false), std::invalid_argument);
  CHECK_NOTHROW(Spectrum({-1.0}, 1.0, 0.0, true));
}

TEST_CASE("MachineSpec validation and resonance fallback") {
  MachineSpec spec;
  spec.rotation_hz = 20.6;
  CHECK_NOTHROW(spec.validate());

  spec.gmf_hz = 711.0;
  spec.bpfo_hz = 107.09;
  spec.bpfi_hz = 155.7;
  spec.impact_resonance_hz = 316.0;
  CHECK_NOTHROW(spec.validate());
  CHECK(spec.resolve_impact_resonance(25000.0) == doctest::Approx(316.0));

  spec.impact_resonance_hz.reset();
  CHECK(spec.resolve_impact_resonance(25000.0) == doctest::Approx(25000.0 / 8.0));

  MachineSpec bad = spec;
  bad.rotation_hz = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.gmf_hz = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.looseness_harmonic_count = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("LabeledDataset split bookkeeping and digest") {
  LabeledDataset ds;
  auto spec = [](double v) { return Spectrum({v, v + 1.0, v + 2.0}, 1.0, 0.0, true); };
  ds.samples.push_back({spec(0.0), FaultLabel::Normal, {"a", AugmentOp::None, 1}});
  ds.samples.push_back({spec(1.0), FaultLabel::Bpfo, {"b", AugmentOp::MaskingNoise, 2}});
  ds.samples.push_back({spec(2.0), FaultLabel::Bpfo, {"c", AugmentOp::TimeStretch, 3}});
  ds.split = {Split::Train, Split::Validation, Split::Test};

  CHECK(ds.count_split(Split::Train) == 1);
  CHECK(ds.count_split(Split::Validation) == 1);
  CHECK(ds.count_split(Split::Test) == 1);
  CHECK(ds.indices_of(Split::Test) == std::vector<std::size_t>{2});

  const auto counts = ds.class_counts();
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 2);
  CHECK(counts[2] == 0);

  const auto d1 = ds.digest();
  CHECK(d1 == ds.digest());
  ds.split[2] = Split::Train;
  CHECK(ds.digest() != d1);
}

TEST_CASE("error hierarchy stays catchable as runtime_error") {
  CHECK_THROWS_AS(throw DataError("x"), std::runtime_error);
  CHECK_THROWS_AS(throw NumericError("x"), std::runtime_error);
}

TEST_CASE("derive_seed separates streams and Rng is reproducible") {
  const auto a = derive_seed(42, "train-baseline", 0);
  const auto b = derive_seed(42, "train-baseline", 1);
  const auto c = derive_seed(42, "test-baseline", 0);
  const auto d = derive_seed(43, "train-baseline", 0);
  CHECK(a != b);
  CHECK(a != c);
  CHECK(a != d);
  CHECK(a == derive_seed(42, "train-baseline", 0));

  Rng r1(a);
  Rng r2(a);
  for (int i = 0; i < 100; ++i) CHECK(r1.uniform() == r2.uniform());

  Rng r3(a);
  double lo = 1e300;
  double hi = -1e300;
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = r3.uniform(2.0, 6.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    mean += u;
  }
  mean /= n;
  CHECK(lo >= 2.0);
  CHECK(hi < 6.0);
  CHECK(mean == doctest::Approx(4.0).epsilon(0.02));

  Rng r4(a);
  double m2 = 0.0;
  double m1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = r4.normal();
    m1 += g;
    m2 += g * g;
  }
  m1 /= n;
  m2 /= n;
  CHECK(m1 == doctest::Approx(0.0).epsilon(0.05));
  CHECK(std::abs(m1) < 0.05);
  CHECK(m2 == doctest::Approx(1.0).epsilon(0.05));

  Rng r5(a);
  for (int i = 0; i < 1000; ++i) {
    const auto v = r5.uniform_int(-3, 3);
    CHECK(v >= -3);
    CHECK(v <= 3);
  }
}
