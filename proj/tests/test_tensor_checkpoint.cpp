// SPDX-License-Identifier: Apache-2.0
#include "clab/nn/checkpoint.hpp"
#include "clab/nn/param_set.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace clab;

TEST_CASE("tensor shape/data invariants")
{
    nn::Tensor t({2, 3});
    CHECK(t.numel() == 6);
    CHECK(t.rank() == 2);
    CHECK(t.matrix().rows() == 2);
    CHECK_THROWS_AS(nn::Tensor({0, 3}), ContractViolation);

    nn::Tensor v = nn::Tensor::from_vector(Vec::Ones(4));
    CHECK(v.rank() == 1);
    CHECK(v.matrix().rows() == 1);
    CHECK(v.matrix().cols() == 4);

    t.data[0] = std::numeric_limits<Scalar>::infinity();
    CHECK_THROWS_AS(t.check_finite("t"), NumericError);
}

TEST_CASE("param set is insertion-ordered with unique names")
{
    nn::ParamSet ps;
    ps.add("b", nn::Tensor({2}));
    ps.add("a", nn::Tensor({3}));
    CHECK(ps.names() == std::vector<std::string>{"b", "a"});
    CHECK_THROWS_AS(ps.add("a", nn::Tensor({1})), UsageError);
    CHECK(ps.momentum("a").size() == 3);
    CHECK(ps.step() == 0);
}

TEST_CASE("checkpoint file round-trips bit-exactly")
{
    const auto dir = std::filesystem::temp_directory_path() / "clab_ckpt_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "t.clab";

    Rng rng(5);
    nn::Tensor a({3, 4});
    for (Index i = 0; i < a.numel(); ++i) a.data[i] = rng.normal();
    // include tricky values
    a.data[0] = 0.1 + 0.2;
    a.data[1] = -0.0;
    a.data[2] = 1e-308;
    nn::Tensor b({7});
    for (Index i = 0; i < b.numel(); ++i) b.data[i] = rng.uniform(-5, 5);

    nn::NamedTensors tensors;
    tensors.emplace_back("enc.w", a);
    tensors.emplace_back("enc.b", b);
    nn::save_tensor_file(path, tensors);

    const nn::NamedTensors back = nn::load_tensor_file(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].first == "enc.w");
    CHECK(back[0].second.shape == std::vector<Index>{3, 4});
    CHECK(std::memcmp(back[0].second.data.data(), a.data.data(),
                      sizeof(Scalar) * static_cast<std::size_t>(a.numel())) == 0);
    CHECK(back[1].first == "enc.b");
    CHECK(std::memcmp(back[1].second.data.data(), b.data.data(),
                      sizeof(Scalar) * static_cast<std::size_t>(b.numel())) == 0);

    // Saving the loaded tensors again reproduces identical bytes.
    const auto path2 = dir / "t2.clab";
    nn::save_tensor_file(path2, back);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    const std::string bytes1((std::istreambuf_iterator<char>(f1)), {});
    const std::string bytes2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(bytes1 == bytes2);
    CHECK(bytes1.substr(0, 4) == "CLAB");
}

TEST_CASE("checkpoint loader rejects corrupt files")
{
    const auto dir = std::filesystem::temp_directory_path() / "clab_ckpt_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "bad.clab";
    {
        std::ofstream os(path, std::ios::binary);
        os << "NOPE";
    }
    CHECK_THROWS_AS(nn::load_tensor_file(path), IngestError);

    const auto truncated = dir / "trunc.clab";
    {
        nn::NamedTensors tensors;
        tensors.emplace_back("x", nn::Tensor({8}));
        nn::save_tensor_file(truncated, tensors);
        std::filesystem::resize_file(truncated, 20);
    }
    CHECK_THROWS_AS(nn::load_tensor_file(truncated), IngestError);
}
