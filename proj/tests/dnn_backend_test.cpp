#include <cmath>
#include <cstdlib>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "trapsift/filterpipe.hpp"
#include "trapsift/registry.hpp"

using namespace trapsift;
namespace fs = std::filesystem;

namespace {

const fs::path kModel = fs::path(TRAPSIFT_TEST_DATA) / "tiny_classifier.onnx";

// The fixture model averages each channel and returns softmax(-2r, 2r) for mean red r,
// so its nonempty probability is the logistic function of 4r.
double expected_score(double mean_red) { return 1.0 / (1.0 + std::exp(-4.0 * mean_red)); }

PreprocessSpec symmetric() { return {224, PixelScale::symmetric, ResizeMethod::bilinear}; }

} // namespace

TEST(DnnBackend, ScoresMatchClosedForm) {
    DnnBackend b;
    b.load(kModel);
    ASSERT_TRUE(b.loaded());
    for (float r : {-1.0f, -0.25f, 0.0f, 0.625f, 1.0f}) { // dyadic, so the pooled mean is exact
        Tensor t = constant_tensor(224, 0.0f);
        for (std::size_t i = 0; i < t.data.size(); i += 3) t.data[i] = r;
        const auto out = b.infer({"x", t});
        EXPECT_EQ(out.source, ScoreSource::classifier);
        EXPECT_NEAR(out.nonempty_probability, expected_score(r), 1e-5) << r;
    }
}

TEST(DnnBackend, DeterministicAcrossInstances) {
    testutil::TempDir d;
    testutil::write_png(d / "img.png", 90, 60, cv::Scalar(30, 200, 140));
    const auto tensor = preprocess(read_bytes(d / "img.png"), symmetric());
    DnnBackend a, b;
    a.load(kModel);
    b.load(kModel);
    const double s1 = a.infer({"img", tensor}).nonempty_probability;
    EXPECT_EQ(s1, a.infer({"img", tensor}).nonempty_probability);
    EXPECT_EQ(s1, b.infer({"img", tensor}).nonempty_probability);
    EXPECT_NEAR(s1, expected_score(140 / 127.5 - 1), 1e-4);
}

TEST(DnnBackend, SidecarMetadata) {
    testutil::TempDir d;
    fs::copy_file(kModel, d / "m.onnx");
    write_json_file(d / "m.onnx.json", Json{{"model_name", "effnet-b0"},
                                            {"precision_mode", "int8"},
                                            {"input_resolution", 224},
                                            {"nonempty_index", 0},
                                            {"warnings", {"swish activations quantize poorly"}}});
    DnnBackend b;
    b.load(d / "m.onnx");
    const auto m = b.metadata();
    EXPECT_EQ(m.backend_id, "opencv-dnn");
    EXPECT_EQ(m.model_name, "effnet-b0");
    EXPECT_EQ(m.precision_mode, PrecisionMode::int8);
    EXPECT_EQ(m.input_resolution, 224);
    ASSERT_EQ(m.warnings.size(), 1u);
    // Index 0 is the empty-class probability.
    EXPECT_NEAR(b.infer({"x", constant_tensor(224, 1.0f)}).nonempty_probability, 1 - expected_score(1.0), 1e-5);
}

TEST(DnnBackend, DefaultsWithoutSidecar) {
    DnnBackend b;
    b.load(kModel);
    EXPECT_EQ(b.metadata().model_name, "tiny_classifier");
    EXPECT_FALSE(b.metadata().input_resolution.has_value());
}

TEST(DnnBackend, Errors) {
    DnnBackend b;
    EXPECT_THROW(b.infer({"x", constant_tensor(224, 0)}), BackendError);
    EXPECT_THROW(b.load("/nonexistent/model.onnx"), BackendError);
    testutil::TempDir d;
    csv::write_text(d / "bad.onnx", "not a model");
    EXPECT_THROW(b.load(d / "bad.onnx"), BackendError);

    DnnOptions o;
    o.nonempty_index = 7;
    DnnBackend c(o);
    c.load(kModel);
    EXPECT_THROW(c.infer({"x", constant_tensor(224, 0)}), BackendError);
}

TEST(Registry, NamesAndEnvironmentDefault) {
    EXPECT_EQ(backend_names(), (std::vector<std::string>{"replay", "opencv-dnn"}));
    EXPECT_NE(dynamic_cast<ReplayBackend*>(make_backend("replay").get()), nullptr);
    EXPECT_NE(dynamic_cast<DnnBackend*>(make_backend("opencv-dnn").get()), nullptr);
    EXPECT_THROW(make_backend("tflite"), ConfigError);

    ::unsetenv(kBackendEnvVar);
    EXPECT_EQ(default_backend_name(), "replay");
    ::setenv(kBackendEnvVar, "opencv-dnn", 1);
    EXPECT_EQ(default_backend_name(), "opencv-dnn");
    ::unsetenv(kBackendEnvVar);
}

TEST(DnnBackend, FilterEndToEnd) {
    testutil::TempDir d;
    std::vector<fs::path> paths;
    // BGR on disk: red images are "animals", black ones are empty.
    for (int i = 0; i < 4; ++i) {
        paths.push_back(d / ("red" + std::to_string(i) + ".png"));
        testutil::write_png(paths.back(), 64, 48, cv::Scalar(0, 0, 255));
        paths.push_back(d / ("black" + std::to_string(i) + ".png"));
        testutil::write_png(paths.back(), 64, 48, cv::Scalar(0, 0, 0));
    }
    DnnBackend b;
    b.load(kModel);
    FilterConfig cfg;
    cfg.threshold = 0.5;
    cfg.quarantine_dir = d / "q";
    const auto run = run_filter(paths, cfg, symmetric(), b);
    EXPECT_EQ(run.report.n_discarded, 4u);
    for (const auto& dec : run.decisions) {
        const bool red = dec.image_id.rfind("red", 0) == 0;
        EXPECT_EQ(dec.decision, red ? Decision::keep : Decision::discard) << dec.image_id;
        EXPECT_NEAR(*dec.nonempty_score, expected_score(red ? 1.0 : -1.0), 1e-5);
    }
}
