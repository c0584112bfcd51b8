from config import limit
from counter import bump
from boxes import make_box

result = bump(limit)
box = make_box()
