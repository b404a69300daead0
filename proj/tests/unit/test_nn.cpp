#include <doctest.h>

#include <filesystem>
#include <random>

#include "folio/nn.hpp"
#include "gradcheck.hpp"
#include "test_support.hpp"

using namespace folio;
using namespace folio::nn;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("folio_test_nn_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("Tensor shape bookkeeping") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.grad.size() == 6);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK(shape_size({4, 5, 6}) == 120);
}

TEST_CASE("forward basics") {
  SUBCASE("empty network is the identity") {
    Network net({5});
    const std::vector<double> x = {1, -2, 3, -4, 5};
    const auto y = net.forward(x);
    CHECK(std::vector<double>(y.begin(), y.end()) == x);
  }
  SUBCASE("zeroed last layer outputs zeros") {
    Network net({6});
    net.dense(8).relu().dense(3);
    net.initialize(4);
    net.zero_last_layer();
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 10; ++rep) {
      for (double v : net.forward(test::gaussian(6, rng))) CHECK(v == 0.0);
    }
  }
  SUBCASE("dense layer equals W x + b") {
    Network net({3});
    net.dense(2);
    auto& d = dynamic_cast<Dense&>(net.layer(0));
    d.weight.data = {1, 2, 3, -1, 0.5, 4};
    d.bias.data = {0.25, -1};
    const auto y = net.forward(std::vector<double>{1, -2, 0.5});
    CHECK(y[0] == 1 * 1 + 2 * -2 + 3 * 0.5 + 0.25);
    CHECK(y[1] == -1 * 1 + 0.5 * -2 + 4 * 0.5 - 1);
  }
  SUBCASE("input size is checked") {
    Network net({3});
    net.dense(2);
    CHECK_THROWS_AS(net.forward(std::vector<double>{1, 2}), std::invalid_argument);
  }
  SUBCASE("seeded initialization is reproducible") {
    Network a({4}), b({4});
    a.dense(5).tanh().dense(2);
    b.dense(5).tanh().dense(2);
    a.initialize(9);
    b.initialize(9);
    CHECK(a.flat_parameters() == b.flat_parameters());
    Network c({4});
    c.dense(5).tanh().dense(2);
    c.initialize(10);
    CHECK(a.flat_parameters() != c.flat_parameters());
  }
}

TEST_CASE("Conv1D matches a direct loop") {
  Conv1D conv(2, 2, 3, 6, 3);
  std::mt19937_64 rng(3);
  conv.initialize(rng);
  conv.bias.data = {0.1, -0.2, 0.3};
  const auto x = test::gaussian(conv.input_size(), rng);
  std::vector<double> y(conv.output_size());
  conv.forward(x, y);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t o = 0; o < 3; ++o) {
      for (std::size_t p = 0; p < 4; ++p) {
        double s = conv.bias.data[o];
        for (std::size_t i = 0; i < 2; ++i) {
          for (std::size_t k = 0; k < 3; ++k) {
            s += conv.weight.data[(o * 2 + i) * 3 + k] * x[(r * 2 + i) * 6 + p + k];
          }
        }
        CHECK(y[(r * 3 + o) * 4 + p] == doctest::Approx(s).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("SimpleRnn matches a direct recurrence") {
  SimpleRnn rnn(4, 2, 3);
  std::mt19937_64 rng(5);
  rnn.initialize(rng);
  rnn.bias.data = {0.1, 0.0, -0.1};
  const auto x = test::gaussian(rnn.input_size(), rng);
  std::vector<double> h(3, 0.0), y(3);
  rnn.forward(x, y);
  for (std::size_t t = 0; t < 4; ++t) {
    std::vector<double> next(3);
    for (std::size_t j = 0; j < 3; ++j) {
      double s = rnn.bias.data[j];
      for (std::size_t i = 0; i < 2; ++i) s += rnn.w_input.data[j * 2 + i] * x[t * 2 + i];
      for (std::size_t i = 0; i < 3; ++i) s += rnn.w_hidden.data[j * 3 + i] * h[i];
      next[j] = std::tanh(s);
    }
    h = next;
  }
  for (std::size_t j = 0; j < 3; ++j) CHECK(y[j] == doctest::Approx(h[j]).epsilon(1e-14));
}

TEST_CASE("backward basics") {
  SUBCASE("sum loss through one dense layer") {
    Network net({3});
    net.dense(2);
    net.initialize(1);
    const std::vector<double> x = {0.5, -1.0, 2.0};
    net.forward(x);
    net.zero_grad();
    net.backward(std::vector<double>{1.0, 1.0});
    auto& d = dynamic_cast<Dense&>(net.layer(0));
    for (std::size_t o = 0; o < 2; ++o) {
      for (std::size_t i = 0; i < 3; ++i) CHECK(d.weight.grad[o * 3 + i] == x[i]);
      CHECK(d.bias.grad[o] == 1.0);
    }
  }
  SUBCASE("output-gradient scaling is linear") {
    Network net({4});
    net.dense(6).relu().dense(3);
    net.initialize(2);
    const std::vector<double> x = {0.3, -0.2, 0.9, 1.1};
    const std::vector<double> g = {0.5, -1.0, 2.0};
    net.forward(x);
    net.zero_grad();
    net.backward(g);
    const auto base = net.flat_gradients();
    std::vector<double> g3;
    for (double v : g) g3.push_back(3.0 * v);
    net.forward(x);
    net.zero_grad();
    net.backward(g3);
    const auto scaled = net.flat_gradients();
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(scaled[i] == doctest::Approx(3.0 * base[i]).epsilon(1e-14));
    }
  }
  SUBCASE("backward without forward is rejected") {
    Network net({2});
    net.dense(1);
    CHECK_THROWS_AS(net.backward(std::vector<double>{1.0}), std::logic_error);
  }
}

TEST_CASE("finite-difference checks for every layer type") {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    std::vector<Network> nets;
    nets.emplace_back(std::vector<std::size_t>{7});
    nets.back().dense(4);
    nets.emplace_back(std::vector<std::size_t>{3, 2, 8});
    nets.back().add(std::make_unique<Conv1D>(3, 2, 4, 8, 3));
    nets.emplace_back(std::vector<std::size_t>{5, 3});
    nets.back().add(std::make_unique<SimpleRnn>(5, 3, 4));
    nets.emplace_back(std::vector<std::size_t>{6});
    nets.back().dense(5).relu().dense(2);
    nets.emplace_back(std::vector<std::size_t>{6});
    nets.back().dense(5).tanh().dense(2);
    for (auto& net : nets) {
      net.initialize(rng());
      worst = std::max(worst, test::check_network(net, rng).worst());
    }
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("softmax") {
  const auto u = softmax(std::vector<double>{2.0, 2.0, 2.0, 2.0});
  for (double v : u) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
  const auto big = softmax_head(std::vector<double>{1000.0, 0.0, 0.0});
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(big[1] < 1e-300);
  CHECK_THROWS_AS(softmax(std::vector<double>{1.0, NAN}), std::invalid_argument);
  CHECK_THROWS_AS(softmax(std::vector<double>{INFINITY, 0.0}), std::invalid_argument);

  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    auto z = test::gaussian(5, rng, 3.0);
    const auto w = softmax(z);
    double s = 0.0;
    for (double v : w) s += v;
    CHECK(std::abs(s - 1.0) <= 1e-12);
    CHECK(on_simplex(w, 1e-12));
    const auto c = test::gaussian(5, rng);
    auto loss = [&] {
      const auto p = softmax(z);
      double v = 0.0;
      for (std::size_t i = 0; i < 5; ++i) v += c[i] * p[i];
      return v;
    };
    const auto analytic = softmax_backward(w, c);
    CHECK(test::relative_error(analytic, test::numeric_gradient(z, loss)) <= 1e-6);
  }
}

TEST_CASE("soft_update") {
  Network online({3}), target({3});
  online.dense(2);
  target.dense(2);
  online.initialize(1);
  target.initialize(2);
  const auto x = online.flat_parameters();
  SUBCASE("tau = 1 copies") {
    soft_update(online, target, 1.0);
    CHECK(target.flat_parameters() == x);
  }
  SUBCASE("tau = 0 leaves the target alone") {
    const auto before = target.flat_parameters();
    soft_update(online, target, 0.0);
    CHECK(target.flat_parameters() == before);
  }
  SUBCASE("two half steps from zero reach three quarters") {
    target.set_flat_parameters(std::vector<double>(x.size(), 0.0));
    soft_update(online, target, 0.5);
    soft_update(online, target, 0.5);
    const auto t = target.flat_parameters();
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(t[i] == 0.75 * x[i]);
  }
  SUBCASE("repeated updates contract toward the online network") {
    double prev = test::max_abs_diff(target.flat_parameters(), x);
    for (int i = 0; i < 20; ++i) {
      soft_update(online, target, 0.1);
      const double d = test::max_abs_diff(target.flat_parameters(), x);
      CHECK(d <= 0.9 * prev + 1e-15);
      prev = d;
    }
  }
  SUBCASE("mismatched architectures") {
    Network other({3});
    other.dense(3);
    CHECK_THROWS_AS(soft_update(online, other, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(soft_update(online, target, 1.5), std::invalid_argument);
  }
}

TEST_CASE("Adam moves against the gradient") {
  Tensor p({2}, {1.0, -1.0});
  Adam adam({0.1});
  std::vector<Tensor*> params = {&p};
  for (int i = 0; i < 200; ++i) {
    p.grad = {2.0 * p.data[0], 2.0 * p.data[1]};
    adam.step(params);
  }
  CHECK(std::abs(p.data[0]) < 0.05);
  CHECK(std::abs(p.data[1]) < 0.05);
  CHECK(adam.steps() == 200);
}

TEST_CASE("checkpoint round-trip") {
  const auto dir = scratch_dir("ckpt");
  Network net({2, 3, 6});
  net.add(std::make_unique<Conv1D>(2, 3, 4, 6, 3)).relu();
  net.dense(5).tanh().dense(2);
  net.initialize(77);
  save_checkpoint(net, dir / "net", {{"note", "unit"}});
  CHECK(std::filesystem::exists(dir / "net.bin"));
  CHECK(std::filesystem::exists(dir / "net.json"));
  auto back = load_checkpoint(dir / "net");
  CHECK(back.flat_parameters() == net.flat_parameters());
  CHECK(back.describe() == net.describe());
  std::mt19937_64 rng(4);
  const auto x = test::gaussian(net.input_size(), rng);
  const auto a = net.forward(x);
  const auto b = back.forward(x);
  CHECK(std::vector<double>(a.begin(), a.end()) == std::vector<double>(b.begin(), b.end()));

  SUBCASE("layout starts with the magic") {
    std::ifstream in(dir / "net.bin", std::ios::binary);
    char magic[8];
    in.read(magic, 8);
    CHECK(std::string(magic, 8) == "FOLIOTNS");
  }
  SUBCASE("corrupt file is rejected") {
    std::ofstream(dir / "bad.bin", std::ios::binary) << "NOTATENSORFILE";
    CHECK_THROWS(read_tensor_file(dir / "bad.bin"));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("the finite-difference oracle flags a wrong gradient") {
  std::mt19937_64 rng(77);
  Network net(std::vector<std::size_t>{6});
  net.dense(5).relu().dense(3);
  net.initialize(9);
  test::jitter(net.parameters(), rng);
  const auto x = test::gaussian(6, rng);
  const auto c = test::gaussian(3, rng);
  auto loss = [&] {
    const auto y = net.forward(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += c[i] * y[i];
    return s;
  };
  net.zero_grad();
  loss();
  net.backward(c);
  auto analytic = test::flat_grads(net.parameters());
  const auto fd = test::finite_difference(net.parameters(), loss);
  CHECK(test::gradient_error(analytic, fd) <= 1e-6);
  analytic[3] *= 1.01;
  analytic[3] += 1e-3;
  CHECK(test::gradient_error(analytic, fd) > 1e-4);
}
