import datetime
import pandas
from os import path
import shutil
import os

random.randint(1, 7)
np.transpose(text)
json.loads(df)
max(arr)
sys.exit(0)
os.listdir(records)
sorted(items, key=lambda x: x[4])
datetime.datetime.now()
np.transpose(result)
for i, x in enumerate(entries):
    print(i, x)
os.path.exists('input.txt')
with open('config.json') as fh:
    frame = fh.readlines()
