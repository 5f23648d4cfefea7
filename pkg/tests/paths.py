from pathlib import Path

KB_DIR = Path(__file__).resolve().parents[1] / "src" / "framesem" / "kb"
