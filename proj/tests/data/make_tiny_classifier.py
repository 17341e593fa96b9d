"""Builds tiny_classifier.onnx: a two-class classifier whose nonempty
probability is sigmoid(4 * mean red channel) for NCHW input in [-1, 1].
Red images score high, black images low, mid-gray about 0.5."""
import numpy as np
import onnx
from onnx import TensorProto, helper, numpy_helper

# Stored as [out, in] with transB=1, the layout OpenCV 4.5 expects.
weights = np.array([[-2.0, 0.0, 0.0], [2.0, 0.0, 0.0]], dtype=np.float32)
bias = np.zeros(2, dtype=np.float32)

graph = helper.make_graph(
    [
        helper.make_node("GlobalAveragePool", ["input"], ["pooled"]),
        helper.make_node("Flatten", ["pooled"], ["flat"], axis=1),
        helper.make_node("Gemm", ["flat", "W", "B"], ["logits"], transB=1),
        helper.make_node("Softmax", ["logits"], ["probs"], axis=1),
    ],
    "tiny_classifier",
    [helper.make_tensor_value_info("input", TensorProto.FLOAT, [1, 3, 224, 224])],
    [helper.make_tensor_value_info("probs", TensorProto.FLOAT, [1, 2])],
    [numpy_helper.from_array(weights, "W"), numpy_helper.from_array(bias, "B")],
)
model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 11)])
model.ir_version = 6
onnx.checker.check_model(model)
onnx.save(model, "tiny_classifier.onnx")
