"""Build the tiny BERT checkpoint under tests/data/tiny_bert and freeze reference outputs.

Run from the repository root:  python3 scripts/make_tiny_bert.py
"""
import json
import pathlib

import torch
from transformers import BertConfig, BertModel, BertTokenizer

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "tiny_bert"

WORDS = [
    "the", "a", "is", "not", "women", "woman", "men", "should", "stay", "in", "kitchen",
    "la", "el", "las", "mujeres", "mujer", "deberian", "estar", "en", "cocina", "no", "es",
    "cafe", "nino", "play", "##ing", "##s", "##ed", "un", "##believ", "##able", "!", "?",
    ".", ",", "@", "<", ">", "user", "url", "#", "y", "o", "que", "de",
]
TEXTS = [
    "Women should stay in the kitchen!",
    "Las mujeres NO deberían estar en la cocina.",
    "unbelievable playing, café niño?",
    "<USER> is <URL> #women",
    "xyzzy qwerty women",
    "the the the the the the the the the the the the the the the the",
]
MAX_TOKENS = 12


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + WORDS
    (OUT / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")

    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=len(vocab), hidden_size=16, num_hidden_layers=2, num_attention_heads=2,
        intermediate_size=32, max_position_embeddings=32, type_vocab_size=2,
        hidden_act="gelu", initializer_range=0.5,
    )
    model = BertModel(config).eval()
    model.save_pretrained(OUT, safe_serialization=True)
    (OUT / "tokenizer_config.json").write_text(json.dumps({"do_lower_case": True}) + "\n")
    tokenizer = BertTokenizer(str(OUT / "vocab.txt"), do_lower_case=True)

    cases = []
    for text in TEXTS:
        enc = tokenizer(text, truncation=True, max_length=MAX_TOKENS, return_tensors="pt")
        with torch.no_grad():
            out = model(**enc)
        cases.append({
            "text": text,
            "ids": enc["input_ids"][0].tolist(),
            "tokens": out.last_hidden_state[0].double().tolist(),
            "cls": out.last_hidden_state[0, 0].double().tolist(),
            "pooler": out.pooler_output[0].double().tolist(),
        })
    expected = {"max_tokens": MAX_TOKENS, "cases": cases}
    (OUT / "expected.json").write_text(json.dumps(expected, indent=1) + "\n")


if __name__ == "__main__":
    main()
