import sys

# deep evalg nesting in recursive fuzz programs
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
