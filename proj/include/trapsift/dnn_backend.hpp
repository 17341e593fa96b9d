#pragma once

// Classifier backend on OpenCV's DNN runtime, loading a portable interchange
// model (ONNX). An optional sidecar `<model>.json` declares metadata and how to
// read the nonempty probability from the output vector.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/dnn.hpp>

#include "trapsift/backend.hpp"
#include "trapsift/error.hpp"
#include "trapsift/json_io.hpp"

namespace trapsift {

struct DnnOptions {
    std::string model_name;
    PrecisionMode precision_mode = PrecisionMode::float32;
    std::optional<int> input_resolution;
    bool nhwc = false;
    /// Output element holding the nonempty probability; defaults to the last one.
    std::optional<int> nonempty_index;
    /// Apply softmax to the raw output first.
    bool softmax = false;
    std::vector<std::string> warnings;
};

class DnnBackend final : public InferenceBackend {
public:
    DnnBackend() = default;
    explicit DnnBackend(DnnOptions opts) : opts_(std::move(opts)), explicit_opts_(true) {}

    void load(const std::filesystem::path& artifact) override {
        if (!std::filesystem::exists(artifact)) throw BackendError("model not found: " + artifact.string());
        if (!explicit_opts_) opts_ = options_for(artifact);
        try {
            net_ = cv::dnn::readNet(artifact.string());
        } catch (const cv::Exception& e) {
            throw BackendError("cannot load model " + artifact.string() + ": " + e.what());
        }
        if (net_.empty()) throw BackendError("cannot load model " + artifact.string());
        net_.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
        net_.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
        loaded_ = true;
    }

    bool loaded() const override { return loaded_; }

    InferenceOutput infer(const InferenceInput& input) override {
        if (!loaded_) throw BackendError("dnn backend not loaded");
        const Tensor& t = input.tensor;
        if (t.channels != 3 || t.data.size() != static_cast<std::size_t>(t.height) * t.width * 3)
            throw BackendError("input tensor must be HxWx3");
        cv::Mat blob;
        cv::Mat hwc(t.height, t.width, CV_32FC3, const_cast<float*>(t.data.data()));
        if (opts_.nhwc) {
            const int shape[] = {1, t.height, t.width, 3};
            blob = cv::Mat(4, shape, CV_32F, const_cast<float*>(t.data.data())).clone();
        } else {
            blob = cv::dnn::blobFromImage(hwc, 1.0, cv::Size(), cv::Scalar(), false, false, CV_32F);
        }
        cv::Mat out;
        try {
            net_.setInput(blob);
            out = net_.forward();
        } catch (const cv::Exception& e) {
            throw BackendError(std::string("inference failed: ") + e.what());
        }
        std::vector<double> values(out.begin<float>(), out.end<float>());
        if (values.empty()) throw BackendError("model produced no output");
        if (opts_.softmax) {
            const double m = *std::max_element(values.begin(), values.end());
            double sum = 0;
            for (double& v : values) sum += (v = std::exp(v - m));
            for (double& v : values) v /= sum;
        }
        const int idx = opts_.nonempty_index.value_or(static_cast<int>(values.size()) - 1);
        if (idx < 0 || idx >= static_cast<int>(values.size()))
            throw BackendError("nonempty_index " + std::to_string(idx) + " out of range");
        InferenceOutput o;
        o.nonempty_probability = std::clamp(values[static_cast<std::size_t>(idx)], 0.0, 1.0);
        return o;
    }

    BackendMetadata metadata() const override {
        BackendMetadata m;
        m.backend_id = "opencv-dnn";
        m.model_name = opts_.model_name;
        m.precision_mode = opts_.precision_mode;
        m.input_resolution = opts_.input_resolution;
        m.warnings = opts_.warnings;
        return m;
    }

    /// Reads `<artifact>.json` when present; otherwise defaults named after the file.
    static DnnOptions options_for(const std::filesystem::path& artifact) {
        DnnOptions o;
        o.model_name = artifact.stem().string();
        const std::filesystem::path sidecar = artifact.string() + ".json";
        if (!std::filesystem::exists(sidecar)) return o;
        const Json j = read_json_file(sidecar);
        try {
            o.model_name = j.value("model_name", o.model_name);
            if (auto it = j.find("precision_mode"); it != j.end())
                o.precision_mode = parse_precision_mode(it->get<std::string>());
            if (auto it = j.find("input_resolution"); it != j.end()) o.input_resolution = it->get<int>();
            o.nhwc = j.value("layout", std::string{"nchw"}) == "nhwc";
            if (auto it = j.find("nonempty_index"); it != j.end()) o.nonempty_index = it->get<int>();
            o.softmax = j.value("softmax", false);
            if (auto it = j.find("warnings"); it != j.end()) o.warnings = it->get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(sidecar.string() + ": " + e.what());
        }
        return o;
    }

private:
    DnnOptions opts_;
    bool explicit_opts_ = false;
    cv::dnn::Net net_;
    bool loaded_ = false;
};

} // namespace trapsift
