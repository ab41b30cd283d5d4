import shutil
import sys
import os
from collections import Counter
import pandas as pd

math.floor(nums)
df = pd.read_csv('data.csv')
np.concatenate((data, words))
lines.startswith(df)
random.shuffle(row)
if not counts:
    print('empty')
[x ** 2 for x in lines]
{**matrix, **config}
dict(zip(my_list, matrix))
[x for x in words if x > 0]
buf.strip()
' '.join(items)
