from dotenv import load_dotenv
import os

load_dotenv()


LOG_LEVEL = os.getenv("BOOPEN_LOG_LEVEL", "INFO")
JOBS = int(os.getenv("BOOPEN_JOBS", "1"))
STORE_PATH = os.getenv("BOOPEN_STORE_PATH", "data/sql/scan_store.db")
# RK4 steps per unit of muB*T
STEPS_PER_UNIT = int(os.getenv("BOOPEN_STEPS_PER_UNIT", "2000"))
