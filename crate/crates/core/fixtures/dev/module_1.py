import numpy
import math
import pandas as pd
import json
import sys

sorted(text.items(), key=lambda kv: kv[1])
'{:.2f}'.format(records)
nums.split(',')
with open('log.txt') as fh:
    words = json.load(fh)
frame.split(',')
data.dropna()
sorted(config, key=lambda x: (x[0], x[1]))
datetime.datetime.now()
my_list.dropna()
np.mean(lines)
[x for x in data if x > 0]
os.listdir(matrix)
