#!/usr/bin/env python3
"""Generate the tic-tac-toe endgame dataset by exhaustive game enumeration.

Plays out every legal game (x moves first, play stops at a win or a full
board) and collects the distinct terminal boards. A board is labeled
positive iff x holds a three-in-a-row. This reproduces the classic
958-instance endgame dataset exactly.
"""

import argparse
import os

LINES = [
    (0, 1, 2), (3, 4, 5), (6, 7, 8),
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (2, 4, 6),
]

COLUMNS = [
    "top-left-square", "top-middle-square", "top-right-square",
    "middle-left-square", "middle-middle-square", "middle-right-square",
    "bottom-left-square", "bottom-middle-square", "bottom-right-square",
]


def winner(board):
    for a, b, c in LINES:
        if board[a] != "b" and board[a] == board[b] == board[c]:
            return board[a]
    return None


def enumerate_terminal_boards():
    terminal = set()

    def play(board, player):
        if winner(board) is not None or "b" not in board:
            terminal.add("".join(board))
            return
        for i, cell in enumerate(board):
            if cell == "b":
                board[i] = player
                play(board, "o" if player == "x" else "x")
                board[i] = "b"

    play(["b"] * 9, "x")
    return sorted(terminal)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="data")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    boards = enumerate_terminal_boards()
    n_pos = sum(1 for b in boards if winner(list(b)) == "x")
    assert len(boards) == 958, f"expected 958 terminal boards, got {len(boards)}"
    assert n_pos == 626, f"expected 626 positive boards, got {n_pos}"

    csv_path = os.path.join(args.out_dir, "tictactoe.csv")
    with open(csv_path, "w") as f:
        f.write(",".join(COLUMNS + ["class"]) + "\n")
        for b in boards:
            label = "positive" if winner(list(b)) == "x" else "negative"
            f.write(",".join(list(b) + [label]) + "\n")

    schema_path = os.path.join(args.out_dir, "tictactoe.schema")
    with open(schema_path, "w") as f:
        for c in COLUMNS:
            f.write(f"{c},discrete\n")
        f.write("class,label\n")

    print(f"wrote {csv_path} ({len(boards)} rows, {n_pos} positive)")


if __name__ == "__main__":
    main()
