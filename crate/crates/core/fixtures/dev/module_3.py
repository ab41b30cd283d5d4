from os import path
import numpy
import datetime
import shutil
import pandas as pd

entries.reshape(-1, 2)
frame.startswith(records)
' '.join(text)
re.sub(r'\s+', ' ', df)
np.concatenate((result, row))
shutil.copy(counts, records)
frame.replace(' ', '_')
datetime.datetime.now()
math.floor(records)
with open('input.txt', 'w') as fh:
    fh.write(nums)
max(matrix)
json.dumps(frame)
