"""Re-derive the four cubic gadgets and print each one with its 32-state energy table."""
import argparse

from heavyhex_qa.reduction import derive_standard_gadgets, dumps_gadget, frozen_gadgets, verify_gadget


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bound", type=int, default=2, help="largest absolute integer coefficient to try")
    args = ap.parse_args()

    fresh = derive_standard_gadgets(args.bound)
    for key, g in sorted(fresh.items(), key=lambda kv: (kv[0][1], -kv[0][0])):
        v = verify_gadget(g)
        print(f"== sign {key[0]:+d}, variant {key[1]}: {'passed' if v.passed else 'FAILED'} ({v.reason})")
        print(dumps_gadget(g), end="")
    print("matches the packaged fixture:", fresh == frozen_gadgets())


if __name__ == "__main__":
    main()
