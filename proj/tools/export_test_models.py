"""Export the tiny encoder/decoder pair used by the model-backend tests.

The pair follows the interchange layout the SAM ONNX exporter produces
(input names, tensor ranks, four candidate masks plus scores), but the
weights are fixed arithmetic so the expected masks can be reasoned about:

  encoder: 1x3x1024x1024 normalized image -> 16x16 average pool -> 1x3x64x64
  decoder: logits = channel mean of the embedding, upsampled to 256x256;
           candidates are [x, -x, 2x, -x] with scores [0.1, 0.8, 0.8, 0.3]
           so a correct single-mask selection picks index 1 (tie -> lowest).

Usage: python3 tools/export_test_models.py tests/data
"""
import sys
import torch


class Encoder(torch.nn.Module):
    def __init__(self):
        super().__init__()
        self.pool = torch.nn.AvgPool2d(16)

    def forward(self, input_image):
        return self.pool(input_image)


class Decoder(torch.nn.Module):
    def __init__(self):
        super().__init__()
        self.score_head = torch.nn.Conv2d(4, 4, kernel_size=1)
        with torch.no_grad():
            self.score_head.weight.zero_()
            self.score_head.bias.copy_(torch.tensor([0.1, 0.8, 0.8, 0.3]))

    def forward(self, image_embeddings, point_coords, point_labels,
                mask_input, has_mask_input, orig_im_size):
        x = image_embeddings.mean(dim=1, keepdim=True)
        x = torch.nn.functional.interpolate(x, scale_factor=4.0, mode="nearest")
        masks = torch.cat([x, -x, 2.0 * x, -x], dim=1)
        pooled = torch.nn.functional.adaptive_avg_pool2d(masks, 1)
        scores = torch.flatten(self.score_head(pooled), 1)
        return masks, scores


def main(out_dir):
    torch.onnx.export(
        Encoder(), (torch.zeros(1, 3, 1024, 1024),),
        f"{out_dir}/tiny_encoder.onnx",
        input_names=["input_image"], output_names=["image_embeddings"],
        opset_version=11, dynamo=False)
    args = (torch.zeros(1, 3, 64, 64), torch.zeros(1, 2, 2), torch.zeros(1, 2),
            torch.zeros(1, 1, 256, 256), torch.zeros(1), torch.tensor([64.0, 64.0]))
    torch.onnx.export(
        Decoder(), args, f"{out_dir}/tiny_decoder.onnx",
        input_names=["image_embeddings", "point_coords", "point_labels",
                     "mask_input", "has_mask_input", "orig_im_size"],
        output_names=["masks", "iou_predictions"],
        dynamic_axes={"point_coords": {1: "num_points"},
                      "point_labels": {1: "num_points"}},
        opset_version=11, dynamo=False)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
